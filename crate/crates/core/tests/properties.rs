use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use terasim_core::atmosphere::{path_attenuation, specific_attenuation, AtmosphericConditions, RainPolarization};
use terasim_core::drf::{select, summarize, Branch, HbpRecord, RisEntry, StrategyOption};
use terasim_core::propagation::{
    free_space_impedance, fresnel_te, fresnel_tm, friis_path_loss, impedance_from_index, refraction_angle,
    roughness_factor,
};
use terasim_core::ris::{pl_general, pl_single_cell, quantize_phase, FieldRegion, LinkGeometry, Pitch, RisPanel};
use terasim_core::scene::{Aabb, Vec3};

fn panel(m: usize, n: usize) -> RisPanel {
    RisPanel {
        id: "p".into(),
        center: Vec3::ZERO,
        normal: Vec3::Z,
        up: None,
        m,
        n,
        d_x: Pitch::Wavelengths(0.35),
        d_y: Pitch::Wavelengths(0.35),
        amplitude: 1.0,
        phase_bits: 0,
    }
}

fn point() -> impl Strategy<Value = Vec3> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.2..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn record() -> impl Strategy<Value = HbpRecord> {
    (
        prop::option::of(80.0..100.0f64),
        prop::collection::vec(95.0..120.0f64, 0..3),
        prop::collection::vec(prop::option::of(80.0..110.0f64), 3),
    )
        .prop_map(|(los, mut nlos, ris)| {
            nlos.sort_by(f64::total_cmp);
            let best = ris
                .iter()
                .enumerate()
                .filter_map(|(j, p)| p.map(|v| (j, v)))
                .fold(None::<(usize, f64)>, |acc, (j, v)| match acc {
                    Some((_, b)) if b <= v => acc,
                    _ => Some((j, v)),
                })
                .map(|(j, _)| j);
            HbpRecord {
                hbp: 0,
                cell: 0,
                x: 0.0,
                y: 0.0,
                los_present: los.is_some(),
                pl_los_geometric: los.unwrap_or(90.0),
                pl_los: los,
                snr_gain_los: ris.iter().map(|p| p.map(|r| los.unwrap_or(90.0) - r)).collect(),
                snr_gain_nlos: ris.iter().map(|p| p.zip(nlos.first().copied()).map(|(r, n)| n - r)).collect(),
                nlos_paths: nlos,
                ris: ris
                    .iter()
                    .map(|p| RisEntry { reachable: p.is_some(), region: p.map(|_| FieldRegion::Near), pl_ris: *p })
                    .collect(),
                best_ris: best,
            }
        })
}

proptest! {
    #[test]
    fn fresnel_magnitudes_bounded(n in 1.0..5.0f64, alpha in 0.0..5000.0f64, f in 100e9..1000e9f64, ti in 0.0..1.55f64) {
        let z1 = Complex64::new(free_space_impedance(), 0.0);
        let z2 = impedance_from_index(n, alpha, f);
        let tt = refraction_angle(1.0, n, ti).unwrap();
        prop_assert!(fresnel_te(z1, z2, ti, tt).unwrap().norm() <= 1.0 + 1e-12);
        prop_assert!(fresnel_tm(z1, z2, ti, tt).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn normal_incidence_polarizations_agree(n in 1.0..5.0f64, alpha in 0.0..5000.0f64) {
        let z1 = Complex64::new(free_space_impedance(), 0.0);
        let z2 = impedance_from_index(n, alpha, 300e9);
        let te = fresnel_te(z1, z2, 0.0, 0.0).unwrap();
        let tm = fresnel_tm(z1, z2, 0.0, 0.0).unwrap();
        prop_assert!((te.norm() - tm.norm()).abs() < 1e-12);
    }

    #[test]
    fn roughness_factor_in_unit_interval(s1 in 0.0..1e-3f64, ds in 0.0..1e-3f64, ti in 0.0..1.5f64) {
        let lambda = 1e-3;
        let a = roughness_factor(s1, ti, lambda);
        let b = roughness_factor(s1 + ds, ti, lambda);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn friis_grows_with_distance(d in 0.1..20.0f64, dd in 0.0..20.0f64) {
        let lambda = 1e-3;
        let a = friis_path_loss(d, lambda, 20.0, 10.0, false);
        let b = friis_path_loss(d + dd, lambda, 20.0, 10.0, false);
        prop_assert!(b >= a);
        let with = friis_path_loss(d, lambda, 20.0, 10.0, true);
        prop_assert!((a - with - 30.0).abs() < 1e-9);
    }

    #[test]
    fn attenuation_nonnegative(f in 1.0..1000.0f64, rh in 0.0..1.0f64, rain in 0.0..100.0f64, fog in 0.0..1.0f64, snow in 0.0..10.0f64) {
        let cond = AtmosphericConditions {
            relative_humidity: Some(rh),
            rain_rate_mm_h: rain,
            fog_density_g_m3: fog,
            snow_rate_mm_h: snow,
            ..AtmosphericConditions::default()
        };
        let g = specific_attenuation(f * 1e9, &cond, RainPolarization::Circular).unwrap();
        for v in [g.gamma_o, g.gamma_w, g.gamma_rain, g.gamma_fog, g.gamma_snow] {
            prop_assert!(v >= 0.0 && v.is_finite());
        }
    }

    #[test]
    fn path_attenuation_additive(g in 0.0..200.0f64, a in 0.0..50.0f64, b in 0.0..50.0f64) {
        let sum = path_attenuation(g, a) + path_attenuation(g, b);
        prop_assert!((path_attenuation(g, a + b) - sum).abs() < 1e-12 * (1.0 + sum));
    }

    #[test]
    fn quantized_phase_is_nearest_level(phi in 0.0..TAU, bits in 1u32..6) {
        let q = quantize_phase(phi, bits);
        let step = TAU / (1u64 << bits) as f64;
        let k = q / step;
        prop_assert!((k - k.round()).abs() < 1e-9 && q < TAU);
        let d = (phi - q).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) <= step / 2.0 + 1e-12);
        prop_assert!(step / 2.0 <= PI);
    }

    #[test]
    fn single_cell_general_exact(tx in point(), rx in point(), a in 0.1..1.0f64, ph in 0.0..TAU) {
        let p = panel(1, 1);
        let g = LinkGeometry::new(&p, tx, rx, 1e-3).unwrap();
        let gamma = Complex64::from_polar(a, ph);
        prop_assert_eq!(pl_general(&g, &[gamma], 20.0, 10.0).unwrap(), pl_single_cell(&g, 0, 0, gamma, 20.0, 10.0));
    }

    #[test]
    fn segment_test_symmetric(a in point(), b in point(), lo in point(), size in point()) {
        let bx = Aabb::new(lo, lo + Vec3::new(size.x.abs(), size.y.abs(), size.z));
        prop_assert_eq!(bx.segment_crosses(a, b), bx.segment_crosses(b, a));
    }

    #[test]
    fn strategies_partition_positions(records in prop::collection::vec(record(), 1..60)) {
        for option in StrategyOption::ALL {
            let s = summarize(&records, option);
            let served = records.iter().filter(|r| select(r, option).branch != Branch::Outage).count();
            let total: f64 = s.branches.iter().map(|b| b.occurrence).sum();
            let counted: usize = s.branches.iter().map(|b| b.count).sum();
            prop_assert_eq!(counted + s.outages, records.len());
            if served > 0 {
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ris_options_never_worse_than_baseline_on_nlos(records in prop::collection::vec(record(), 1..60)) {
        for r in &records {
            let base = select(r, StrategyOption::Baseline);
            if base.branch == Branch::Nlos {
                for o in [StrategyOption::Opt1, StrategyOption::Opt2, StrategyOption::Opt3] {
                    let s = select(r, o);
                    prop_assert!(s.pl.unwrap() <= base.pl.unwrap() || r.best_ris.is_none() || matches!(s.branch, Branch::Ris(_)));
                }
            }
            prop_assert_eq!(select(r, StrategyOption::Opt2).branch == Branch::Los, r.los_present);
        }
    }
}
