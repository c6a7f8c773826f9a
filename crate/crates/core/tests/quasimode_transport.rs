use num_complex::Complex64;
use qml::grid::{lp_norm, Field2D, GridSpec};
use qml::io::{decode_field, decode_phase_table, encode_field, encode_phase_table};
use qml::propagator::{phase_table_with, quasimode_pullback, quasimode_pushforward, PhaseOptions};
use qml::symbols::{GraphFn, SymbolSpec};

fn packet(g: GridSpec) -> Field2D {
    Field2D::from_fn(g, |x1, x2| Complex64::new((-(x1 * x1) / 0.08 - x2 * x2 / 0.5).exp(), 0.0)).unwrap()
}

#[test]
fn pushforward_then_pullback_recovers_the_packet() {
    let g = GridSpec::new(3.0, 64, 0.1).unwrap();
    let times: Vec<f64> = (0..g.n).map(|i| g.x(i)).filter(|x| x.abs() <= 1.0).collect();
    let opts = PhaseOptions { xi_cut: Some(0.6), ..PhaseOptions::default() };
    let t = phase_table_with(&SymbolSpec::GraphSymbol(GraphFn::BentCircle), g, &times, opts).unwrap();
    let u = packet(g);
    let v = quasimode_pushforward(&t, &u).unwrap();
    let back = quasimode_pullback(&t, &v).unwrap();
    let rel = back.sub(&u).unwrap().l2_norm() / u.l2_norm();
    assert!(rel < 1e-2, "{rel}");
    assert!((v.l2_norm() / u.l2_norm() - 1.0).abs() < 1e-2);

    // Containers carry the same numbers back.
    let v2 = decode_field(&encode_field(&v)).unwrap();
    assert_eq!(v2.grid, v.grid);
    assert_eq!(lp_norm(&v2, 4.0).unwrap().to_bits(), lp_norm(&v.materialize(), 4.0).unwrap().to_bits());
    let t2 = decode_phase_table(&encode_phase_table(&t)).unwrap();
    let again = quasimode_pushforward(&t2, &u).unwrap();
    assert_eq!(again.materialize().values, v.materialize().values);
}
