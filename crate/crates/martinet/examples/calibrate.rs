//! Prints the observed audit statistics used to freeze the regression bands.
//!
//! Run with `cargo run --release -p martinet --example calibrate`.

use martinet::chains::{chain_audit, monotonicity_audits, ChainConfig, MonotonicityGrid};
use martinet::exec::stream_rng;
use martinet::geometry::{ahlfors_audit, ball_volume_mc, AhlforsGrid};
use martinet::metric::{delta, BesovParams, FrameParams, SpacePoint, SurfacePoint};
use martinet::oracle::{cc_bracket, equivalence_audit, OracleConfig};
use martinet::trace::{builtin_fields, trace_ratio, BesovConfig, TraceConfig};
use rand::Rng;

fn main() {
    oracle_bands();
    equivalence_regression();
    ball_volume_regression();
    ahlfors_bands();
    chain_bands();
    trace_values();
    monotonicity_values();
}

fn oracle_bands() {
    println!("== oracle ratio bands (upper/delta max, delta/lower max) ==");
    let cfg = OracleConfig {
        segments: 8,
        starts: 16,
        seed: 7,
        tol: 1e-8,
    };
    for &alpha in &[1.0, 1.5, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let mut max_upper = 0.0f64;
        let mut max_inv_lower = 0.0f64;
        let mut rng = stream_rng(2024, 0);
        for _ in 0..40 {
            let c = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mag = 10f64.powf(-2.0 + 4.0 * rng.gen::<f64>());
                if rng.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            };
            let p = SpacePoint::new(c(&mut rng), c(&mut rng), c(&mut rng));
            let q = SpacePoint::new(c(&mut rng), c(&mut rng), c(&mut rng));
            let d = delta(p, q, fp).total;
            let b = cc_bracket(p, q, fp, &cfg).unwrap();
            max_upper = max_upper.max(b.upper / d);
            max_inv_lower = max_inv_lower.max(d / b.lower);
            assert!(b.lower <= b.upper * (1.0 + 1e-12));
        }
        println!("alpha {alpha}: upper/delta {max_upper:.4}, delta/lower {max_inv_lower:.4}");
    }
}

fn equivalence_regression() {
    println!("== equivalence audit alpha=2, 200 pairs, seed 7 ==");
    let fp = FrameParams::new(2.0).unwrap();
    let cfg = OracleConfig {
        segments: 8,
        starts: 16,
        seed: 7,
        tol: 1e-8,
    };
    let rep = equivalence_audit(fp, 200, 7, &cfg).unwrap();
    println!("{}", serde_json::to_string_pretty(&rep).unwrap());
}

fn ball_volume_regression() {
    println!("== ball volume at offset center ==");
    let fp = FrameParams::new(2.0).unwrap();
    let p = SpacePoint::new(10.0, 0.0, 0.0);
    for n in [200_000u64, 1_000_000] {
        let e = ball_volume_mc(p, 1.0, fp, n, 7).unwrap();
        println!(
            "n={n}: vol={:.6} ci={:.6} normalized={:.6}",
            e.value,
            e.half_width,
            e.value / 10.0
        );
    }
    let origin = SpacePoint::ORIGIN;
    for r in [0.5, 1.0, 2.0] {
        let e = ball_volume_mc(origin, r, fp, 400_000, 7).unwrap();
        println!(
            "origin r={r}: vol={:.6} ci={:.6} vol/r^5={:.6}",
            e.value,
            e.half_width,
            e.value / r.powi(5)
        );
    }
}

fn ahlfors_bands() {
    println!("== ahlfors ratios ==");
    for &alpha in &[1.0, 1.5, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let rep = ahlfors_audit(fp, &AhlforsGrid::default(), 200_000, 100_000, 7).unwrap();
        let mut min_v = f64::INFINITY;
        let mut max_v = 0.0f64;
        let mut min_s = f64::INFINITY;
        let mut max_s = 0.0f64;
        for row in &rep.rows {
            min_v = min_v.min(row.ratio_vol);
            max_v = max_v.max(row.ratio_vol);
            min_s = min_s.min(row.ratio_sur);
            max_s = max_s.max(row.ratio_sur);
        }
        println!(
            "alpha {alpha}: ratio_vol [{min_v:.4}, {max_v:.4}] ratio_sur [{min_s:.4}, {max_s:.4}] status {:?}",
            rep.status
        );
    }
}

fn chain_bands() {
    println!("== chain length ratio bands ==");
    let cfg = ChainConfig::default();
    for &alpha in &[1.0, 1.5, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let mut worst = 0.0f64;
        let mut rng = stream_rng(31, 0);
        for _ in 0..4000 {
            let u = SurfacePoint::new(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
            let v = SurfacePoint::new(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
            if u == v {
                continue;
            }
            let audit = chain_audit(u, v, fp, &cfg).unwrap();
            worst = worst.max(audit.length_over_delta);
        }
        println!("alpha {alpha}: max length/delta {worst:.3}");
    }
}

fn trace_values() {
    println!("== trace ratios for gauss ==");
    for &alpha in &[1.0, 2.0] {
        for &p in &[1.5, 2.0, 3.0] {
            let fp = FrameParams::new(alpha).unwrap();
            let bp = BesovParams::new(p).unwrap();
            let f = builtin_fields("gauss", fp).unwrap();
            let cfg = TraceConfig {
                mc: BesovConfig {
                    samples: 200_000,
                    seed: 7,
                    ..Default::default()
                },
                ..Default::default()
            };
            let rep = trace_ratio(f.as_ref(), fp, bp, &cfg).unwrap();
            println!(
                "alpha {alpha} p {p}: ratio {:.5} lhs {:.5}+-{:.5} rhs {:.5} cutoff_shift {:.6} stable {}",
                rep.ratio,
                rep.lhs.value,
                rep.lhs.half_width,
                rep.rhs,
                rep.cutoff_shift,
                rep.cutoff_stable
            );
        }
    }
}

fn monotonicity_values() {
    println!("== monotonicity audits ==");
    for &alpha in &[1.0, 1.5, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let rep = monotonicity_audits(fp, &MonotonicityGrid::default()).unwrap();
        print!("alpha {alpha}:");
        for e in &rep.entries {
            print!(
                " [eps0 {}: slope {:.5} reparam {:.5}]",
                e.eps0, e.tau_weighted_slope, e.reparam_deviation
            );
        }
        println!(
            " slope_dec {} reparam_dec {}",
            rep.tau_slope_decreasing, rep.reparam_decreasing
        );
    }
}
