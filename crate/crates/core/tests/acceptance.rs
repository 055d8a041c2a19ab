//! Acceptance suite. Prints one line per criterion and exits nonzero if any fails.
//!
//! `cargo test --release -p shenchannel --test acceptance -- 2 5` runs a subset.

mod common;

use common::*;
use shenchannel::matrices::dense_oracle;
use shenchannel::mesh::build_mesh;
use shenchannel::solvers::{BiharmonicCoeffs, HelmholtzCoeffs};
use shenchannel::verify::{
    channel_smoke, os_convergence_space, os_convergence_time, pipeline_scaling,
    roundoff_experiment, solver_scaling, ExperimentReport, OsSpaceOptions, OsTimeOptions,
    PipelineOptions, ReportRow, SmokeOptions, SolverScalingOptions,
};
use shenchannel::{
    BiharmonicLu, HelmholtzLu, MatrixId, MatrixSet, PointFamily, Space, Transformer,
};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

const FAMILIES: [PointFamily; 2] = [
    PointFamily::ChebyshevGauss,
    PointFamily::ChebyshevGaussLobatto,
];

type Outcome = Result<(bool, String), String>;

fn worst<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> (bool, usize, Option<&'a ReportRow>) {
    let rows: Vec<&ReportRow> = rows.collect();
    let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
    let first_fail = rows.iter().find(|r| !r.pass).copied();
    (pass, rows.len(), first_fail)
}

fn describe(r: &ReportRow) -> String {
    let p: Vec<String> = r
        .parameters
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!(
        "{} {} = {:.4e} ({})",
        p.join(" "),
        r.quantity,
        r.measured,
        r.tolerance
    )
}

fn rows_named<'a>(
    report: &'a ExperimentReport,
    name: &'a str,
) -> impl Iterator<Item = &'a ReportRow> {
    report.rows.iter().filter(move |r| r.quantity == name)
}

fn max_of(report: &ExperimentReport, name: &str) -> f64 {
    rows_named(report, name).fold(0.0_f64, |m, r| m.max(r.measured))
}

fn range_of(report: &ExperimentReport, name: &str) -> (f64, f64) {
    rows_named(report, name)
        .filter(|r| r.tolerance != shenchannel::verify::Tolerance::None)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.measured), hi.max(r.measured))
        })
}

fn print_failures(report: &ExperimentReport) {
    for r in report.failures() {
        println!("    {} {}", report.id, describe(r));
    }
}

fn roundoff() -> Outcome {
    let start = Instant::now();
    let report = roundoff_experiment(
        &[64, 128, 256, 512, 1024, 2048, 4096],
        &[0.0, 200.0, 1800.0, 5400.0],
        1.0 / 5200.0,
        1e-5,
        100,
        2024,
    )
    .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (pb, nb, _) = worst(rows_named(&report, "biharmonic"));
    let (ph, nh, _) = worst(rows_named(&report, "helmholtz"));
    print_failures(&report);
    Ok((
        pb && ph && nb == 28 && nh == 28 && secs <= 300.0,
        format!(
            "max biharmonic {:.3e} (<= 1e-9), max helmholtz {:.3e} (<= 1e-12), {secs:.1} s (<= 300 s)",
            max_of(&report, "biharmonic"),
            max_of(&report, "helmholtz")
        ),
    ))
}

fn oracle_equivalence() -> Outcome {
    let (nu, dt) = (1.0 / 5200.0, 1e-5);
    let mut rng = rng(77);
    let (mut eb, mut eh) = (0.0_f64, 0.0_f64);
    for n_x in [16, 32, 64] {
        let fam = PointFamily::ChebyshevGauss;
        let set = MatrixSet::assemble(n_x, fam).map_err(|e| e.to_string())?;
        let q = dense_oracle(Space::Biharmonic, Space::Biharmonic, 4, n_x, fam);
        let a = dense_oracle(Space::Biharmonic, Space::Biharmonic, 2, n_x, fam);
        let b = dense_oracle(Space::Biharmonic, Space::Biharmonic, 0, n_x, fam);
        let ad = dense_oracle(Space::Dirichlet, Space::Dirichlet, 2, n_x, fam);
        let bd = dense_oracle(Space::Dirichlet, Space::Dirichlet, 0, n_x, fam);
        for z in [0.0_f64, 10.0, 200.0] {
            let z2 = z * z;
            let bc = BiharmonicCoeffs::implicit(nu, dt, z2);
            let hc = HelmholtzCoeffs::implicit(nu, dt, z2);
            let hb = &q * bc.xi0 + &a * bc.xi1 + &b * bc.xi2;
            let hh = &ad * hc.c_a + &bd * hc.c_b;
            let bl = BiharmonicLu::from_set(&set, nu, dt, z2).map_err(|e| e.to_string())?;
            let hl = HelmholtzLu::from_set(&set, nu, dt, z2).map_err(|e| e.to_string())?;
            for _ in 0..50 {
                let r = random_complex(&mut rng, bl.len());
                eb = eb.max(max_rel(&bl.solve(&r), &dense_lu_solve(&hb, &r)));
                let r = random_complex(&mut rng, hl.len());
                eh = eh.max(max_rel(&hl.solve(&r), &dense_lu_solve(&hh, &r)));
            }
        }
    }
    Ok((
        eb <= 1e-10 && eh <= 1e-10,
        format!("max relative difference biharmonic {eb:.3e}, helmholtz {eh:.3e} (<= 1e-10)"),
    ))
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    Ok(pool.install(f))
}

fn solver_scaling_check() -> Outcome {
    let report = single_thread(|| solver_scaling(&SolverScalingOptions::default()))?
        .map_err(|e| e.to_string())?;
    let checked = report
        .rows
        .iter()
        .filter(|r| r.quantity.ends_with("_ratio"));
    let (pass, n, _) =
        worst(checked.filter(|r| r.tolerance != shenchannel::verify::Tolerance::None));
    print_failures(&report);
    let (bl, bh) = range_of(&report, "biharmonic_ratio");
    let (hl, hh) = range_of(&report, "helmholtz_ratio");
    Ok((
        pass && n == 8,
        format!("t(2N)/(2t(N)) biharmonic [{bl:.3}, {bh:.3}], helmholtz [{hl:.3}, {hh:.3}] (in [0.8, 1.4])"),
    ))
}

fn matrix_fidelity() -> Outcome {
    let mut err = 0.0_f64;
    let mut at = String::new();
    for family in FAMILIES {
        for n_x in [8, 16, 32] {
            let set = MatrixSet::assemble(n_x, family).map_err(|e| e.to_string())?;
            for id in MatrixId::ALL {
                let (row, col, d) = id.signature();
                let e = max_rel_matrix(&set.dense(id), &dense_oracle(row, col, d, n_x, family));
                if e > err {
                    err = e;
                    at = format!("{id} n_x={n_x} {}", family.short_name());
                }
            }
        }
    }
    Ok((
        err <= 1e-11,
        format!("max relative difference {err:.3e} at {at} (<= 1e-11)"),
    ))
}

fn transform_round_trips() -> Outcome {
    let mut rng = rng(5);
    let (mut e1, mut e2) = (0.0_f64, 0.0_f64);
    for family in FAMILIES {
        for n_x in 8..=64 {
            let mesh =
                Arc::new(build_mesh(n_x, 6, 4, 2.0, 3.0, family).map_err(|e| e.to_string())?);
            let t = Transformer::new(mesh.clone());
            for space in Space::ALL {
                let c = random_spectral(&mesh, space, &mut rng);
                let u = t.inverse(&c).map_err(|e| e.to_string())?;
                let c2 = t.forward(&u, space).map_err(|e| e.to_string())?;
                e1 = e1.max(field_rel(&c2, &c));
                let u2 = t.inverse(&c2).map_err(|e| e.to_string())?;
                let d = (&u2.data - &u.data)
                    .iter()
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                e2 = e2.max(d / u.max_abs());
            }
        }
    }
    Ok((
        e1 <= 1e-12 && e2 <= 1e-12,
        format!("forward(inverse) {e1:.3e}, inverse(forward) {e2:.3e} (<= 1e-12)"),
    ))
}

fn os_time() -> Outcome {
    let start = Instant::now();
    let report = os_convergence_time(&OsTimeOptions::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (pl, nl, _) = worst(rows_named(&report, "l2_order"));
    let (pe, ne, _) = worst(rows_named(&report, "energy_order"));
    let first = report
        .rows_with("dt", "0.1")
        .find(|r| r.quantity == "l2_error");
    let pf = first.is_some_and(|r| r.pass);
    print_failures(&report);
    let (ll, lh) = range_of(&report, "l2_order");
    let (el, eh) = range_of(&report, "energy_order");
    Ok((
        pl && pe && pf && nl == 6 && ne == 6 && secs <= 600.0,
        format!(
            "L2 order [{ll:.3}, {lh:.3}] (in [1.9, 2.1]), energy order [{el:.3}, {eh:.3}] (in [1.9, 2.2]), \
             |u'|(dt=0.1) {:.4e} (within 3x of 2.9005e-9), {secs:.1} s (<= 600 s)",
            first.map_or(f64::NAN, |r| r.measured)
        ),
    ))
}

fn os_space() -> Outcome {
    let opts = OsSpaceOptions::default();
    let report = os_convergence_space(&opts).map_err(|e| e.to_string())?;
    let gc: Vec<&ReportRow> = report
        .rows_with("family", PointFamily::ChebyshevGauss.short_name())
        .filter(|r| r.quantity == "l2_error_over_epsilon")
        .collect();
    let (pass, n, _) = worst(gc.iter().copied());
    print_failures(&report);
    let values: Vec<String> = gc.iter().map(|r| format!("{:.3e}", r.measured)).collect();
    Ok((
        pass && n == opts.nx_list.len(),
        format!("GC error/eps for n_x 16..256: {}", values.join(", ")),
    ))
}

fn stepper_invariants() -> Outcome {
    let outcome =
        channel_smoke(&SmokeOptions::default(), |_, _| Ok(())).map_err(|e| e.to_string())?;
    let r = &outcome.report;
    print_failures(r);
    let get = |q: &str| rows_named(r, q).next().map(|row| (row.pass, row.measured));
    let (fp, _) = get("finite").unwrap_or((false, 0.0));
    let (cp, cv) = get("max_continuity_residual").unwrap_or((false, f64::NAN));
    let (qp, qv) = get("max_relative_flux_deviation").unwrap_or((false, f64::NAN));
    Ok((
        fp && cp && qp && r.table.len() == 500,
        format!(
            "{} steps, finite {fp}, continuity {cv:.3e} (<= 1e-10), flux deviation {qv:.3e} (<= 1e-2)",
            r.table.len()
        ),
    ))
}

fn pipeline() -> Outcome {
    let report = single_thread(|| pipeline_scaling(&PipelineOptions::default()))?
        .map_err(|e| e.to_string())?;
    let checked = report.rows.iter().filter(|r| {
        r.quantity.ends_with("_ratio") && r.tolerance != shenchannel::verify::Tolerance::None
    });
    let (pass, n, _) = worst(checked);
    print_failures(&report);
    let parts: Vec<String> = ["total_ratio", "assemble_ratio", "solve_ratio"]
        .iter()
        .map(|q| {
            let (lo, hi) = range_of(&report, q);
            format!("{} [{lo:.3}, {hi:.3}]", q.trim_end_matches("_ratio"))
        })
        .collect();
    Ok((
        pass && n > 0,
        format!("{} (in [0.8, 1.3])", parts.join(", ")),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("roundoff", roundoff),
        ("oracle equivalence", oracle_equivalence),
        ("solver scaling", solver_scaling_check),
        ("matrix fidelity", matrix_fidelity),
        ("transform round-trips", transform_round_trips),
        ("OS temporal order", os_time),
        ("OS spatial decay", os_space),
        ("stepper invariants", stepper_invariants),
        ("pipeline scaling", pipeline),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .filter(|i| (1..=9).contains(i))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} | {} [{:.1} s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
