use twistdensity::curve::known::curve_11a;
use twistdensity::curve::ApTable;
use twistdensity::density::family_density_with;
use twistdensity::family::{FamilyWeights, Weighting};
use twistdensity::predict::{main_terms, ratios_density, SymSquare};
use twistdensity::testfn::{build_testfn, build_weight, TestFnKind, WeightKind};

#[test]
fn ratios_prediction_tracks_the_family_density() {
    let e = curve_11a();
    let wf = build_weight(WeightKind::Gaussian, 11).unwrap();
    let tf = build_testfn(TestFnKind::Fejer, 0.3).unwrap();
    let table = ApTable::compute(&e, 100_000).unwrap();
    let sym = SymSquare::new(&e, &table);
    let fam = FamilyWeights::build(&wf, 1e4, Weighting::Repetitions).unwrap();
    let density = family_density_with(&e, &tf, &fam, &table).unwrap();
    let ratios = ratios_density(&e, &tf, &fam, &wf, &sym).unwrap();
    let main = main_terms(&e, &tf, &fam, &wf, &table).unwrap();
    let gap = (density.total - ratios.total).abs();
    assert!(gap <= ratios.uncertainty.max(0.05), "{gap} vs {}", ratios.uncertainty);
    // Both predictions share the log-average term; their difference is the
    // integral against the closed even sum, bounded by the Sym² uncertainty.
    assert!((ratios.total - main.total).abs() <= ratios.uncertainty + 1e-3, "{} {}", ratios.total, main.total);
}
