//! Physics outputs against frozen values from the scripts in `tests/oracles/`.

use num_complex::Complex64;
use serde_json::Value;
use terasim_core::atmosphere::{fog_coefficient, gaseous_components};
use terasim_core::data;
use terasim_core::propagation::{fresnel_te, fresnel_tm, free_space_impedance, impedance_from_index, refraction_angle};

const CLOSED_FORM_REL: f64 = 1e-9;
const ITU_REL: f64 = 0.05;

fn load(name: &str) -> Value {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn complex_rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

#[test]
fn wave_impedance_matches_oracle() {
    let o = load("fresnel_oracle.json");
    let rows = o["impedance"].as_array().unwrap();
    assert!(rows.len() >= 20);
    for r in rows {
        let z = impedance_from_index(f(r, "n"), f(r, "alpha"), f(r, "f_hz"));
        let want = Complex64::new(f(r, "re"), f(r, "im"));
        let e = complex_rel_err(z, want);
        assert!(e < CLOSED_FORM_REL, "{r}: got {z}, rel {e:e}");
    }
}

#[test]
fn fresnel_coefficients_match_oracle() {
    let o = load("fresnel_oracle.json");
    let rows = o["fresnel"].as_array().unwrap();
    assert!(rows.len() >= 20);
    let z1 = Complex64::new(free_space_impedance(), 0.0);
    for r in rows {
        let (n, ti) = (f(r, "n"), f(r, "theta_i"));
        let z2 = impedance_from_index(n, f(r, "alpha"), f(r, "f_hz"));
        let tt = refraction_angle(1.0, n, ti).unwrap();
        let te = fresnel_te(z1, z2, ti, tt).unwrap();
        let tm = fresnel_tm(z1, z2, ti, tt).unwrap();
        let e_te = complex_rel_err(te, Complex64::new(f(r, "te_re"), f(r, "te_im")));
        let e_tm = complex_rel_err(tm, Complex64::new(f(r, "tm_re"), f(r, "tm_im")));
        assert!(e_te < CLOSED_FORM_REL, "TE {r}: rel {e_te:e}");
        assert!(e_tm < CLOSED_FORM_REL, "TM {r}: rel {e_tm:e}");
    }
}

#[test]
fn brewster_minimum_for_lossless_dielectric() {
    let o = load("fresnel_oracle.json");
    let want = f(&o, "brewster_n2");
    assert!((want - 2f64.atan()).abs() < 1e-4);
    let z1 = Complex64::new(free_space_impedance(), 0.0);
    let z2 = impedance_from_index(2.0, 0.0, 300e9);
    let tt = refraction_angle(1.0, 2.0, want).unwrap();
    assert!(fresnel_tm(z1, z2, want, tt).unwrap().norm() < 1e-4);
}

#[test]
fn gaseous_attenuation_matches_oracle() {
    let o = load("itu_oracle.json");
    let rows = o["gas"].as_array().unwrap();
    assert!(rows.len() >= 20);
    let tables = data::tables().unwrap();
    for r in rows {
        let g = gaseous_components(tables, f(r, "f_ghz"), f(r, "p_dry_hpa"), f(r, "rho_g_m3"), f(r, "t_k")).unwrap();
        let (eo, ew) = (rel_err(g.oxygen_db_km, f(r, "gamma_o")), rel_err(g.water_vapour_db_km, f(r, "gamma_w")));
        assert!(eo < ITU_REL, "oxygen {r}: got {}, rel {eo:e}", g.oxygen_db_km);
        assert!(ew < ITU_REL, "water vapour {r}: got {}, rel {ew:e}", g.water_vapour_db_km);
    }
}

#[test]
fn fog_coefficient_matches_oracle() {
    let o = load("itu_oracle.json");
    let rows = o["fog"].as_array().unwrap();
    assert!(rows.len() >= 20);
    for r in rows {
        let k = fog_coefficient(f(r, "f_ghz") * 1e9, f(r, "t_k")).unwrap();
        let e = rel_err(k, f(r, "k_l"));
        assert!(e < ITU_REL, "{r}: got {k}, rel {e:e}");
    }
}
