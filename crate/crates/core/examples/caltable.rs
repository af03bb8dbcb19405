use dqa_core::algebra::*;
use dqa_core::sampling::{sample_lambda, trial_rng};
use num_complex::Complex;

fn main() {
    for gamma in [0.3f64, 0.5] {
        for n in [2usize, 3] {
            let mut samples = Vec::new();
            for t in 0..20u64 {
                let mut rng = trial_rng(0xCAFE, "calibration-test", t);
                samples.push(sample_lambda::<f64, _>(&mut rng, n, gamma, gamma, 0.05).unwrap());
            }
            let s = StructureSet::<f64>::rs_rational(n, Complex::from(gamma)).unwrap();
            println!("== n={n} gamma={gamma}");
            match calibrate_lax(&s, &samples) {
                Ok(out) => {
                    for (i, r) in out.records.iter().enumerate() {
                        let mark = if i == out.winner { " <== winner" } else { "" };
                        println!("  {:28} median {:.3e}{}", r.candidate.label, r.median, mark);
                    }
                }
                Err(e) => println!("  calibration failed: {e}"),
            }
        }
    }
}
