use solpath::baseline::{grid_pass_error, make_schedule, run_discretization};
use solpath::evaluate::{compute_ground_truth, path_error, GridSpec, GroundTruthOptions};
use solpath::io::{
    create_file, read_coefficients, read_ground_truth, write_coefficients, write_ground_truth,
};
use solpath::optimize::Controller;
use solpath::pathlearn::{learned_path, run_alsp, run_lsp, AlspConfig};
use solpath::problems::{synth_market, Portfolio2D, QuadraticToy, TargetPath};
use solpath::{Basis, BoxDomain, LambdaDistribution, ParametricProblem, SgdConfig};

fn toy_setup() -> (QuadraticToy, Basis, LambdaDistribution) {
    (
        QuadraticToy::on_symmetric_unit(TargetPath::Power(1)),
        Basis::legendre(2, 1),
        LambdaDistribution::uniform(BoxDomain::symmetric_unit()),
    )
}

#[test]
fn same_seed_same_trace() {
    let (p, b, dist) = toy_setup();
    let cfg = SgdConfig::new(500, 42);
    let a = run_lsp(&p, &b, &dist, &cfg, None, None).unwrap();
    let c = run_lsp(&p, &b, &dist, &cfg, None, None).unwrap();
    assert_eq!(a.rows, c.rows);
    assert_eq!(a.final_coefficients, c.final_coefficients);
    let other = run_lsp(&p, &b, &dist, &SgdConfig::new(500, 43), None, None).unwrap();
    assert_ne!(a.final_coefficients, other.final_coefficients);
}

#[test]
fn realizable_toy_is_learned_exactly() {
    let (p, b, dist) = toy_setup();
    let truth = compute_ground_truth(
        &p,
        &GridSpec::Uniform { per_axis: 257 },
        &GroundTruthOptions::default(),
    )
    .unwrap();
    let tr = run_lsp(&p, &b, &dist, &SgdConfig::new(1000, 1), None, Some(&truth)).unwrap();
    let last = tr.last().unwrap().path_error.unwrap();
    assert!(last < 1e-12, "final path error {last}");
    let calls: Vec<u64> = tr.rows.iter().map(|r| r.gradient_calls).collect();
    assert!(calls.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn diagnostic_controller_still_converges() {
    let (p, b, dist) = toy_setup();
    let truth = compute_ground_truth(
        &p,
        &GridSpec::Uniform { per_axis: 129 },
        &GroundTruthOptions::default(),
    )
    .unwrap();
    let mut cfg = SgdConfig::new(3000, 2);
    cfg.controller = Controller::distance_diagnostic();
    let tr = run_lsp(&p, &b, &dist, &cfg, None, Some(&truth)).unwrap();
    assert!(tr.last().unwrap().path_error.unwrap() < 1e-8);
}

#[test]
fn alsp_stages_grow_and_improve() {
    let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(3));
    let dist = LambdaDistribution::uniform(BoxDomain::symmetric_unit());
    let rule = dist.default_quadrature().unwrap();
    let truth = compute_ground_truth(
        &p,
        &GridSpec::Uniform { per_axis: 257 },
        &GroundTruthOptions::default(),
    )
    .unwrap();
    let cfg = AlspConfig::new(2, 4, SgdConfig::new(20000, 0));
    let res = run_alsp(&p, &Basis::legendre(2, 1), &dist, &cfg, &rule, Some(&truth)).unwrap();
    let qs: Vec<usize> = res.stages.iter().map(|s| s.q).collect();
    assert!(qs.windows(2).all(|w| w[1] == w[0] + 1), "{qs:?}");
    assert!(res.final_basis.q() >= 4);
    let last = res.stages.last().unwrap().path_error.unwrap();
    assert!(last < 1e-10, "final stage error {last}");
}

#[test]
fn discretization_counts_and_invariant() {
    let p = Portfolio2D::new(synth_market(3, 6).unwrap()).unwrap();
    let sched = make_schedule(1.0 / 36.0, 0.65, 1.0).unwrap();
    let (path, trace) = run_discretization(&p, &sched).unwrap();
    assert_eq!(trace.total_gradient_calls(), sched.total_gradient_calls(2));
    assert_eq!(path.len(), sched.points_per_axis * sched.points_per_axis);
    let opts = GroundTruthOptions::default();
    let n = sched.points_per_axis;
    let nodes = compute_ground_truth(&p, &GridSpec::Uniform { per_axis: n }, &opts).unwrap();
    let fine = compute_ground_truth(
        &p,
        &GridSpec::Uniform {
            per_axis: 8 * (n - 1) + 1,
        },
        &opts,
    )
    .unwrap();
    let gp = grid_pass_error(&path, &p, &nodes).unwrap();
    let eps = path_error(&p, |l| path.lookup(l).to_vec(), &fine)
        .unwrap()
        .sup;
    assert!(gp <= eps, "grid pass {gp} above path error {eps}");
}

#[test]
fn coefficient_and_truth_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (p, b, dist) = toy_setup();
    let tr = run_lsp(&p, &b, &dist, &SgdConfig::new(50, 0), None, None).unwrap();
    let beta = tr.final_coefficients.unwrap();
    let path = dir.path().join("c.csv");
    write_coefficients(&b, &beta, create_file(&path).unwrap()).unwrap();
    assert_eq!(read_coefficients(&b, &path).unwrap(), beta);
    let lp = learned_path(&beta, &b).unwrap();
    assert_eq!(lp.eval(&[0.3]).unwrap().len(), p.dim());

    let truth = compute_ground_truth(
        &p,
        &GridSpec::Uniform { per_axis: 33 },
        &GroundTruthOptions::default(),
    )
    .unwrap();
    let tpath = dir.path().join("t.csv");
    write_ground_truth(&truth, create_file(&tpath).unwrap()).unwrap();
    let back = read_ground_truth(&tpath).unwrap();
    assert_eq!(back.len(), truth.len());
    for i in 0..truth.len() {
        assert_eq!(back.theta(i), truth.theta(i));
        assert_eq!(back.lambda(i), truth.lambda(i));
    }
}
