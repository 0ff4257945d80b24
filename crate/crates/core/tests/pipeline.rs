//! End-to-end pipeline test: a simulation serialized to the input file
//! schemas and re-ingested through the loaders reproduces the directly
//! generated panel.

use sentfactor::panel::{
    compute_excess_return, load_factor_table, load_returns, load_vix_series, load_yield_series,
    merge_panel, Unit,
};
use sentfactor::sentiment::{aggregate_daily, load_items, rolling_volatility, Lexicon};
use sentfactor::synthetic::{generate_panel, generate_raw, write_input_files, SimulationConfig};

#[test]
fn serialized_inputs_round_trip_through_the_loaders() {
    let mut cfg = SimulationConfig::default();
    cfg.n_days = 150;
    cfg.n_assets = 2;
    cfg.seed = 9090;
    let (direct, _) = generate_panel(&cfg).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let raw = generate_raw(&cfg).unwrap();
    write_input_files(&raw, dir.path()).unwrap();

    let factors = load_factor_table(&dir.path().join("factors.csv"), Unit::Percent).unwrap();
    let yields = load_yield_series(&dir.path().join("yields.csv")).unwrap();
    let vix = load_vix_series(&dir.path().join("vix.csv")).unwrap();
    let returns = load_returns(&dir.path().join("returns.csv"), Unit::Percent).unwrap();
    let lexicon = Lexicon::builtin();
    let items = load_items(&dir.path().join("sentiment.csv"), &lexicon).unwrap();
    let daily = aggregate_daily(&items);
    let hv = rolling_volatility(&daily, cfg.hv_window).unwrap();
    let excess = compute_excess_return(&returns, &factors).unwrap();
    let loaded = merge_panel(&factors, &yields, &daily, Some(&hv), &vix, &excess).unwrap();

    assert_eq!(loaded.assets, direct.assets);
    assert_eq!(loaded.rows.len(), direct.rows.len());
    // The conservation invariant holds for the reloaded merge too.
    let r = &loaded.report;
    assert_eq!(
        r.rows_in_factors,
        r.rows_out + r.rows_dropped_for_missing + r.rows_absent_from_other_series
    );
    for (a, b) in loaded.rows.iter().zip(direct.rows.iter()) {
        assert_eq!(a.date, b.date);
        // Percent round trips and probability-pair encodings cost a few ulps.
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
        assert!(close(a.mkt_rf, b.mkt_rf), "{} vs {}", a.mkt_rf, b.mkt_rf);
        assert!(close(a.smb, b.smb));
        assert!(close(a.hml, b.hml));
        assert!(close(a.rmw, b.rmw));
        assert!(close(a.cma, b.cma));
        assert!(close(a.dgs10_diff, b.dgs10_diff));
        assert!(close(a.s_t, b.s_t), "{} vs {}", a.s_t, b.s_t);
        assert!(close(a.hv_t.unwrap(), b.hv_t.unwrap()));
        assert!(close(a.vix_close, b.vix_close));
        for (x, y) in a.excess.iter().zip(b.excess.iter()) {
            assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }
}
