//! Invariants checked on random inputs.

use std::f64::consts::PI;

use proptest::prelude::*;
use qsslab::area_map::{beta, beta_fixed_point};
use qsslab::curve::{area_difference, Curve};
use qsslab::grid::GridField;
use qsslab::harness::{Config, Snapshot, HEADER_LEN};
use qsslab::numerics::bump::smooth_step;
use qsslab::qss::{BlockTable, REFINE};
use qsslab::spectral::{project_velocity, spectral_divergence, Fft2, SpectralField};

fn any_bits() -> impl Strategy<Value = f64> {
    any::<u64>().prop_map(f64::from_bits)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshots_round_trip_bit_for_bit(
        res in 1usize..12,
        comps in 1usize..=2,
        time in any_bits(),
        level in any::<i32>(),
        seed in prop::collection::vec(any_bits(), 1..64),
    ) {
        let data: Vec<f64> = (0..comps * res * res).map(|i| seed[i % seed.len()]).collect();
        let snap = Snapshot::new(GridField::from_data(res, comps, data).unwrap(), time, level).unwrap();
        let mut bytes = Vec::new();
        snap.write_to(&mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), HEADER_LEN + 8 * comps * res * res);
        let back = Snapshot::read_from(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(back.time.to_bits(), time.to_bits());
        prop_assert_eq!(back.level, level);
        prop_assert_eq!(back.kind, snap.kind);
        let same = back.field.data().iter().zip(snap.field.data()).all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
        let cut = bytes.len() - 1;
        prop_assert!(Snapshot::read_from(&mut &bytes[..cut]).is_err());
    }

    #[test]
    fn fft_round_trip_and_parseval(n in prop::sample::select(vec![6usize, 8, 12, 16]), seed in any::<u64>()) {
        let fft = Fft2::new(n).unwrap();
        let g = GridField::from_fn(n, |x| ((seed % 97) as f64 * x[0] + 13.0 * x[1] * x[1]).sin() + x[0] * x[1]);
        let spec = SpectralField::from_grid(&fft, &g, 0).unwrap();
        let back = spec.to_grid(&fft);
        prop_assert!(back.l2_distance(&g) < 1e-12);
        prop_assert!((spec.l2_sq(&fft) - g.l2_sq()).abs() < 1e-12 * (1.0 + g.l2_sq()));
    }

    #[test]
    fn circle_offsets_sweep_the_annulus(r in 0.05f64..0.3, frac in -0.3f64..0.3) {
        let circle = Curve::from_fn(|s| [0.5 + r * s.cos(), 0.5 - r * s.sin()], 256, true, 2.0 * PI).unwrap();
        let c = frac * r;
        let exact = PI * ((r + c).powi(2) - r * r);
        let got = area_difference(&circle, &vec![c; circle.len()]);
        prop_assert!((got - exact).abs() <= 1e-10 * exact.abs().max(1e-3 * r * r), "{got} {exact}");
    }

    #[test]
    fn beta_iteration_matches_closed_form(
        kappa in -4.0f64..4.0,
        l in 0.05f64..0.2,
        dk in -0.05f64..0.05,
        dl in -0.002f64..0.002,
        yf in -0.5f64..0.5,
    ) {
        // Offsets stay well inside the focal distance of both curves.
        let y = yf * l / (kappa.abs() + dk.abs() + 1.0);
        let s = beta_fixed_point(kappa, l, kappa + dk, l + dl, y).unwrap();
        let exact = beta(kappa + dk, l + dl, y) - beta(kappa, l, y);
        prop_assert!((s.delta_beta - exact).abs() <= 1e-12 * (beta(kappa, l, y).abs() + 1e-12));
    }

    #[test]
    fn refinement_tiles_inherit_their_parents(blocks in 1usize..9, level in 0u32..3) {
        let table = BlockTable::peano(blocks);
        prop_assert!(table.validate().is_ok());
        let (coarse, fine) = (table.assignment(level), table.assignment(level + 1));
        let (side, fine_side) = (BlockTable::side(level), BlockTable::side(level + 1));
        prop_assert_eq!(fine.len(), fine_side * fine_side);
        for j in 0..fine_side {
            for i in 0..fine_side {
                let parent = coarse[(j / REFINE) * side + i / REFINE] as usize;
                let child = table.children[parent][REFINE * (j % REFINE) + i % REFINE];
                prop_assert_eq!(fine[j * fine_side + i] as usize, child);
            }
        }
    }

    #[test]
    fn leray_projection_is_idempotent(a in -2.0f64..2.0, b in -2.0f64..2.0, k in 1u32..4) {
        let n = 16;
        let fft = Fft2::new(n).unwrap();
        let w = 2.0 * PI * k as f64;
        let g = GridField::vector_from_fn(n, |x| [a * (w * x[0]).sin() + (w * x[1]).cos(), b * (w * x[1]).cos() * (w * x[0]).sin()]);
        let mut v = [g.comp(0).to_vec(), g.comp(1).to_vec()];
        project_velocity(&fft, &mut v);
        prop_assert!(spectral_divergence(&fft, &v) < 1e-10);
        let once = v.clone();
        project_velocity(&fft, &mut v);
        let drift = once.iter().flatten().zip(v.iter().flatten()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(drift < 1e-12);
    }

    #[test]
    fn smooth_step_is_a_monotone_symmetric_step(x in 0.0f64..1.0, dx in 0.0f64..0.1) {
        let (s, t) = (smooth_step(x), smooth_step((x + dx).min(1.0)));
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(t >= s);
        prop_assert!((s + smooth_step(1.0 - x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rendered_configs_parse_back(seed in any::<u64>(), cfl in 0.1f64..1.0, eps in prop::collection::vec(1e-4f64..0.1, 2..5)) {
        let list = eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
        let c = Config::parse(&format!("family = circle\neps = {list}\nseed = {seed}\ncfl = {cfl}\n")).unwrap();
        let again = Config::parse(&c.render()).unwrap();
        prop_assert_eq!(again.render(), c.render());
        prop_assert_eq!(again.seed, seed);
        prop_assert_eq!(again.eps, eps);
    }
}
