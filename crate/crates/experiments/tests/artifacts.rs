use proptest::prelude::*;
use twodisk::geometry::perp;
use twodisk::{Conductivity, HarmonicPolynomial, HarmonicTerm, Vec2};
use twodisk_experiments::config::parse_background;
use twodisk_experiments::runners::{
    run_condition_sweep, run_grid_error_sweep, run_level_curves, run_projection_study, run_solve, CONDITION_COLUMNS,
    FIELD_COLUMNS, GRID_SWEEP_COLUMNS, PROJECTION_COLUMNS,
};
use twodisk_experiments::{parse_config, run, Command, ExperimentConfig, RunRecord};

fn cfg(text: &str) -> ExperimentConfig {
    parse_config(text).unwrap()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

#[test]
fn csv_schemas_are_exact() {
    let grid = run_grid_error_sweep(&cfg("eps = 0.05\nm_list = 16, 32")).unwrap();
    assert_eq!(
        header(grid.artifact("grid_sweep.csv").unwrap()),
        GRID_SWEEP_COLUMNS.join(",")
    );
    assert_eq!(
        GRID_SWEEP_COLUMNS.join(","),
        "M,rel_l2_std,rel_l2_aug,rel_inf_std,rel_inf_aug,argmax_node_std,argmax_node_aug"
    );

    let cond = run_condition_sweep(&cfg("eps_list = 0.1, 0.05\nm = 16\nspectrum_eps = 0.02")).unwrap();
    assert_eq!(
        header(cond.artifact("condition.csv").unwrap()),
        "eps,sigma_min,sigma_max,cond"
    );
    assert_eq!(CONDITION_COLUMNS.len(), 4);
    let spectrum = cond.artifact("singular_values.csv").unwrap();
    assert_eq!(spectrum.lines().count(), 1 + 32);

    let proj = run_projection_study(&cfg("eps = 0.02\nm = 16\nprojections = 5")).unwrap();
    let text = proj.artifact("projections.csv").unwrap();
    assert_eq!(header(text), PROJECTION_COLUMNS.join(","));
    assert_eq!(
        header(text),
        "rank_from_smallest,sigma,proj_rhs_std,proj_rhs_aug,proj_res_std,proj_res_aug"
    );
    assert_eq!(text.lines().count(), 6);

    let levels = run_level_curves(&cfg("eps = 0.1\nm = 16\nresolution = 12\ncontours = 4")).unwrap();
    assert_eq!(header(levels.artifact("field.csv").unwrap()), FIELD_COLUMNS.join(","));
    assert_eq!(levels.artifact("field.csv").unwrap().lines().count(), 1 + 144);
}

#[test]
fn csv_output_is_deterministic() {
    let c = cfg("eps_list = 0.1, 0.02, 0.01\nm = 32\nH = re:1:1, im:2:0.5");
    for command in [Command::SweepEps, Command::Condition, Command::Solve] {
        let a = run(command, &c).unwrap();
        let b = run(command, &c).unwrap();
        assert_eq!(a.artifacts, b.artifacts, "{command:?}");
    }
}

#[test]
fn record_round_trips_through_json() {
    let out = run_solve(&cfg("eps_list = 0.1, 0.01\nm = 16\nH = const:0.3, re:1:0.1, im:2:-1.7")).unwrap();
    let json = out.record.to_json().unwrap();
    let back = RunRecord::from_json(&json).unwrap();
    assert_eq!(back, out.record);
    assert!(back.entries.iter().all(|e| e.get("a_perfect").is_some()));
}

#[test]
fn written_files_match_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_solve(&cfg("eps = 0.1\nm = 16")).unwrap();
    out.write_to(dir.path()).unwrap();
    let boundary = std::fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert_eq!(boundary, out.artifact("boundary.csv").unwrap());
    assert!(dir.path().join("record.json").exists());
    let rows: Vec<&str> = boundary.lines().skip(1).collect();
    assert_eq!(rows.len(), 32);
    assert!(rows[0].starts_with("0.1,16,augmented,perfect,re:1:1,1,0,"));
}

#[test]
fn grid_sweep_rows_follow_input_order() {
    let out = run_grid_error_sweep(&cfg("eps = 0.05\nm_list = 64, 16, 32")).unwrap();
    let ms: Vec<&str> = out
        .artifact("grid_sweep.csv")
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ms, ["64", "16", "32"]);
}

fn field_rows(csv: &str) -> Vec<(f64, f64, Option<f64>, bool)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                (!f[2].is_empty()).then(|| f[2].parse().unwrap()),
                f[3] == "1",
            )
        })
        .collect()
}

#[test]
fn mask_is_exactly_disks_plus_margin() {
    let c = cfg("eps = 0.05\nm = 64\nresolution = 41, 31\nbbox = -3, 3, -2, 2\ncontours = 6");
    let out = run_level_curves(&c).unwrap();
    let geometry = c.geometry(0.05).unwrap();
    let margin = 2.0 * 2.0 * std::f64::consts::PI / 64.0;
    for (x1, x2, u, masked) in field_rows(out.artifact("field.csv").unwrap()) {
        let x = Vec2::new(x1, x2);
        let near = [geometry.disk1(), geometry.disk2()]
            .iter()
            .any(|d| d.signed_distance(x) < margin);
        assert_eq!(masked, near, "at {x:?}");
        assert_eq!(u.is_none(), masked);
    }
}

#[test]
fn insulated_x1_field_is_mirror_symmetric() {
    let c =
        cfg("eps = 0.05\nm = 64\nconductivity = insulated\nlayout = aligned\nresolution = 31, 21\nbbox = -3, 3, -2, 2");
    let out = run_level_curves(&c).unwrap();
    let rows = field_rows(out.artifact("field.csv").unwrap());
    let (nx, ny) = (31, 21);
    for iy in 0..ny {
        for ix in 0..nx {
            let a = rows[iy * nx + ix].2;
            let b = rows[(ny - 1 - iy) * nx + ix].2;
            match (a, b) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-10, "{a} vs {b}"),
                (None, None) => {}
                _ => panic!("mask is not symmetric"),
            }
        }
    }
}

#[test]
fn perfect_contours_do_not_cross_circles() {
    let c = cfg("eps = 0.05\nm = 64\nresolution = 61, 41\nbbox = -3, 3, -2, 2\ncontours = 10");
    let out = run_level_curves(&c).unwrap();
    let svg = out.artifact("contours.svg").unwrap();
    let geometry = c.geometry(0.05).unwrap();
    let coords: Vec<f64> = svg
        .lines()
        .filter(|l| l.starts_with("<path"))
        .flat_map(|l| {
            let d = l.split(" d=\"").nth(1).unwrap().split('"').next().unwrap().to_owned();
            d.replace(['M', 'L'], " ")
                .split_whitespace()
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect();
    assert!(!coords.is_empty());
    for p in coords.chunks(2) {
        let x = Vec2::new(p[0], p[1]);
        assert!(geometry.disk1().signed_distance(x) > 0.0 && geometry.disk2().signed_distance(x) > 0.0);
    }
}

#[test]
fn oracle_method_reproduces_augmented_boundary_data() {
    let solve = |method: &str| {
        let out = run_solve(&cfg(&format!(
            "eps = 0.05\nm = 64\nquadrature = interpolatory\nmethod = {method}"
        )))
        .unwrap();
        assert!(out.record.succeeded());
        out.record.entries[0].get("potential_difference").unwrap()
    };
    let (o, a) = (solve("oracle"), solve("augmented"));
    assert!((o - a).abs() < 1e-7, "{o} vs {a}");
}

#[test]
fn insulated_duality_holds_through_the_drivers() {
    let h = HarmonicPolynomial::linear(0.4, 1.0);
    let geometry = twodisk::TwoDiskConfig::canonical(1.0, 1.0, 0.05).unwrap();
    let disc = twodisk::Discretization::new(64).with_quadrature(twodisk::CrossQuadrature::Interpolatory);
    let (ins, _) =
        twodisk::SolutionField::solve(&geometry, &h, disc, Conductivity::Insulated, twodisk::Mode::Augmented).unwrap();
    let (per, _) = twodisk::SolutionField::solve(
        &geometry,
        &h.conjugate(),
        disc,
        Conductivity::Perfect,
        twodisk::Mode::Augmented,
    )
    .unwrap();
    let x = Vec2::new(0.3, 2.5);
    let d = (ins.eval_grad_u(x).unwrap() - perp(per.eval_grad_u(x).unwrap())).norm();
    assert!(d < 1e-8, "{d}");
}

proptest! {
    #[test]
    fn background_syntax_round_trips(
        c in -5.0..5.0f64,
        terms in proptest::collection::btree_map(1u32..6, (-3.0..3.0f64, -3.0..3.0f64), 0..4),
    ) {
        let terms: Vec<HarmonicTerm> = terms
            .into_iter()
            .map(|(degree, (re, im))| HarmonicTerm { degree, re, im })
            .collect();
        let h = HarmonicPolynomial::new(c, terms).unwrap();
        let parsed = parse_background(&h.to_string()).unwrap();
        let x = Vec2::new(0.7, -1.3);
        prop_assert_eq!(parsed.eval(x), h.eval(x));
        prop_assert_eq!(parsed.to_string(), h.to_string());
    }

    #[test]
    fn node_count_validation(m in 1usize..600) {
        let ok = parse_config(&format!("m = {m}")).is_ok();
        prop_assert_eq!(ok, m >= 8 && m % 2 == 0);
    }
}
