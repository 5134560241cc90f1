//! Scratch probe: where does the first-visit estimate deviate most from the
//! exact taboo oracle?

use covertime::graph::{generate, Family};
use covertime::markov::{
    build_chain, exact_mixing_time, first_visit_prefactor, first_visit_terms, taboo_profile,
    DEFAULT_MIXING_CAP,
};

fn main() {
    let omega = 20.0;
    for (name, fam) in [
        ("circulant:10:4", Family::RegularCirculant { n: 10, degree: 4 }),
        ("random:10:0.7 seed 5", Family::DenseRandom { n: 10, p: 0.7, theta: 0.4, seed: 5 }),
        ("random:10:0.7 seed 4", Family::DenseRandom { n: 10, p: 0.7, theta: 0.4, seed: 4 }),
        ("complete:12", Family::Complete { n: 12 }),
        ("circulant:12:6", Family::RegularCirculant { n: 12, degree: 6 }),
    ] {
        let g = generate(&fam).unwrap();
        let c = build_chain(&g);
        let t_mix = exact_mixing_time(&c, omega, DEFAULT_MIXING_CAP).unwrap();
        let mut worst = (0.0f64, 0u32, 0u32, 0u64);
        let mut worst_pref = 1.0f64;
        for v in 0..g.n() as u32 {
            let est = first_visit_terms(&c, v, t_mix, omega);
            for u in 0..g.n() as u32 {
                if u == v {
                    continue;
                }
                let pref = first_visit_prefactor(&c, u, v, &est);
                if (pref - 1.0).abs() > (worst_pref - 1.0).abs() {
                    worst_pref = pref;
                }
                let profile = taboo_profile(&c, u, v, 10 * t_mix);
                for (t, &oracle) in profile.iter().enumerate().skip(t_mix as usize) {
                    let rel = (pref * est.survival(t as u64) - oracle).abs() / oracle;
                    if rel > worst.0 {
                        worst = (rel, u, v, t as u64);
                    }
                }
            }
        }
        let (rel, u, v, t) = worst;
        println!(
            "{name}: T={t_mix} worst rel={rel:.4} at (u={u}, v={v}, t={t}); most extreme prefactor {worst_pref:.4}"
        );
    }
}
