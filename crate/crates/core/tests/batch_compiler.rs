use qiplab::batch::{
    advice, advice_payoffs, build_game, compile, induced_channel, product_strategy_value, rows, BatchKind, BatchProofSpec,
    ColumnSet,
};
use qiplab::fixtures::default_batch_relation;
use qiplab::game::{solve_game, DEFAULT_SUPPORT_CONSTANT};
use qiplab::qds::{analyze, Evaluation};
use qiplab::relation::BitString;

fn sketch() -> BatchProofSpec {
    BatchProofSpec::new(BatchKind::Sketch, default_batch_relation(), 4, 0.25, 1).unwrap()
}

#[test]
fn sketch_batch_compiles_within_advice_bound() {
    let bp = sketch();
    assert!(bp.compression().unwrap().holds);
    let bg = build_game(&bp).unwrap();
    assert_eq!(bg.column_set, ColumnSet::AllTuples);
    assert_eq!(bg.game.cols.len(), 1296);
    let sol = solve_game(&bg.game).unwrap();
    assert!(sol.duality_gap < 1e-7);
    let eps = bp.rho.sqrt();
    let adv = advice(&bg, &sol, eps, DEFAULT_SUPPORT_CONSTANT, 11).unwrap();
    assert_eq!(adv.entries.len(), 58);
    let bound = advice_payoffs(&bp, &adv).unwrap().into_iter().map(|(_, p)| p).fold(0.0, f64::max);
    assert!(bound <= sol.value + eps + 1e-12);
    for x in ["00", "01", "10"] {
        let x = BitString::new(x).unwrap();
        let c = compile(&bp, &adv, &x).unwrap();
        let zeros = BitString::zeros(8);
        let batch_completeness = bp.protocol(&zeros).unwrap().accept_probability(&zeros).unwrap();
        for w in bp.base.witnesses(&x) {
            assert!((c.accept_probability(&w).unwrap() - batch_completeness).abs() < 1e-12);
        }
        let wi = c.wi_error_all_pairs().unwrap();
        assert!(wi <= bound + 1e-6, "x={x}: {wi} > {bound}");
    }
}

#[test]
fn point_mass_product_values_obey_the_chain() {
    let bp = sketch();
    let rs = rows(&bp.base);
    for (i, r) in rs.iter().enumerate() {
        let mut sigma = vec![0.0; rs.len()];
        sigma[i] = 1.0;
        let v = product_strategy_value(&bp, &sigma).unwrap();
        let q = analyze(&induced_channel(&bp, r, 1).unwrap(), Evaluation::Exact).unwrap();
        assert!(v <= 2.0 * q.delta + 1e-9);
    }
}
