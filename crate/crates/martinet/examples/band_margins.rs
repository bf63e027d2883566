//! Sweeps the frozen audit bands across seeds they were not calibrated on,
//! printing the worst observed margins.

use martinet::chains::{chain_audit, chain_length_band, ChainConfig};
use martinet::exec::stream_rng;
use martinet::geometry::{ahlfors_audit, ahlfors_band, AhlforsGrid, AuditStatus};
use martinet::metric::{delta, FrameParams, SpacePoint, SurfacePoint};
use martinet::oracle::{cc_bracket, equivalence_band, OracleConfig};
use rand::Rng;

fn main() {
    // Bracket bands across fresh seeds.
    for &alpha in &[1.0f64, 1.5, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let band = equivalence_band(alpha);
        let mut worst_u = 0.0f64;
        let mut worst_l = 0.0f64;
        for seed in 1..=3u64 {
            let cfg = OracleConfig {
                segments: 8,
                starts: 16,
                seed,
                tol: 1e-8,
            };
            let mut rng = stream_rng(seed, 77);
            for _ in 0..25 {
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
                assert!(b.lower <= b.upper * (1.0 + 1e-12));
                worst_u = worst_u.max(b.upper / d);
                worst_l = worst_l.max(d / b.lower);
            }
        }
        println!(
            "bracket alpha {alpha}: upper/delta {worst_u:.3}, delta/lower {worst_l:.3} (band {band})"
        );
    }

    // Regularity band across fresh seeds.
    for &alpha in &[1.0f64, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let band = ahlfors_band(alpha);
        for seed in 1..=3u64 {
            let rep = ahlfors_audit(fp, &AhlforsGrid::default(), 200_000, 100_000, seed).unwrap();
            assert_eq!(rep.status, AuditStatus::Pass, "alpha {alpha} seed {seed}");
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for row in &rep.rows {
                lo = lo.min(row.ratio_vol.min(row.ratio_sur));
                hi = hi.max(row.ratio_vol.max(row.ratio_sur));
            }
            println!(
                "ahlfors alpha {alpha} seed {seed}: ratios [{lo:.3}, {hi:.3}] (band [{:.3}, {band}])",
                1.0 / band
            );
        }
    }

    // Chain-length band across fresh seeds.
    let cfg = ChainConfig::default();
    for &alpha in &[1.0f64, 1.5, 2.0, 3.0] {
        let fp = FrameParams::new(alpha).unwrap();
        let mut worst = 0.0f64;
        for seed in 40..44u64 {
            let mut rng = stream_rng(seed, 0);
            for _ in 0..2000 {
                let u =
                    SurfacePoint::new(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
                let v =
                    SurfacePoint::new(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
                if u == v {
                    continue;
                }
                worst = worst.max(chain_audit(u, v, fp, &cfg).unwrap().length_over_delta);
            }
        }
        println!(
            "chains alpha {alpha}: max length/delta {worst:.3} (band {})",
            chain_length_band(alpha)
        );
    }
}
