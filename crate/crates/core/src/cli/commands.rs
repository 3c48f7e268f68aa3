use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;

use super::scenario::{DesignFile, DesignRecord};
use super::{
    render, CliError, CommonArgs, DesignArgs, RankDemoArgs, Scenario, SimulateArgs, Text,
    VerifyArgs, EXIT_CHECK_FAILED, EXIT_INFEASIBLE, EXIT_OK,
};
use crate::counterexamples::{
    build_c1, build_c1_asymmetric, cayley_hamilton_demo, sufficiency_vacuity, zero_matrix_check,
    Frame, DEFAULT_IDENTITY_TOL,
};
use crate::design::{feasible_shift, verify_design, DesignProblem};
use crate::linalg::{gaussian_matrix, projector, seeded_rng};
use crate::polynomial::{FilterCoefficients, ShiftMatrix};
use crate::report::{CounterexampleReport, Relation};
use crate::sim::{compare_with_centralized, CommStats};
use crate::Error;

fn exit_code(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

// verify

#[derive(Serialize)]
struct Section {
    name: &'static str,
    pass: bool,
    reports: Vec<CounterexampleReport>,
}

impl Section {
    fn new(name: &'static str, reports: Vec<CounterexampleReport>) -> Self {
        Self {
            name,
            pass: reports.iter().all(|r| r.overall),
            reports,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    tol: f64,
    trials: u64,
    pass: bool,
    sections: Vec<Section>,
}

impl Text for VerifyReport {
    fn text(&self) -> String {
        let mut s = format!(
            "verify: seed {}, tol {:e}, {} trials\n",
            self.seed, self.tol, self.trials
        );
        for sec in &self.sections {
            let _ = writeln!(
                s,
                "\n== {} [{}] ({} reports)",
                sec.name,
                mark(sec.pass),
                sec.reports.len()
            );
            for r in &sec.reports {
                s.push_str(&r.to_string());
            }
        }
        let _ = writeln!(s, "\noverall: {}", mark(self.pass));
        s
    }
}

pub(super) fn verify(a: &VerifyArgs) -> Result<(i32, String), CliError> {
    let seed = a.common.seed.unwrap_or(0);
    let tol = a.common.tol.unwrap_or(DEFAULT_IDENTITY_TOL);
    let trials = a.trials;
    let frames: Vec<Frame> = std::iter::once(Frame::Canonical)
        .chain((0..trials).map(|k| Frame::Seeded(seed.wrapping_add(k))))
        .collect();

    let c1 = frames
        .iter()
        .map(|&f| build_c1(f, tol).map(|c| c.report))
        .collect::<Result<Vec<_>, Error>>()?;
    let asym = frames
        .iter()
        .map(|&f| build_c1_asymmetric(f, tol).map(|c| c.report))
        .collect::<Result<Vec<_>, Error>>()?;

    let mut zero = Vec::new();
    for n in 1..=8 {
        for r in 1..=n {
            zero.push(zero_matrix_check(
                n,
                r,
                seed.wrapping_add((n * 8 + r) as u64),
                tol,
            )?);
        }
    }

    let mut ch = Vec::new();
    for n in 3..=8 {
        ch.push(
            cayley_hamilton_demo(n, 2 * n, trials as usize, seed.wrapping_add(n as u64))?.report,
        );
    }

    let mut vac = CounterexampleReport::new("sufficiency vacuity (m1 + m2 = n)");
    for n in 1..=10 {
        let v = sufficiency_vacuity(n, n);
        let rel = if n >= 4 {
            Relation::GreaterThan
        } else {
            Relation::AtMost
        };
        vac.check(format!("n={n}: n2 - n"), (v.n2 - n as i64) as f64, rel, 0.0);
    }

    let sections = vec![
        Section::new("symmetric_counterexample", c1),
        Section::new("asymmetric_counterexample", asym),
        Section::new("zero_matrix", zero),
        Section::new("cayley_hamilton", ch),
        Section::new("sufficiency_vacuity", vec![vac]),
    ];
    let pass = sections.iter().all(|s| s.pass);
    let body = VerifyReport {
        seed,
        tol,
        trials,
        pass,
        sections,
    };
    Ok((exit_code(pass), render(&a.common, "verify", &body)?))
}

// design

fn load_problem(path: &Path, common: &CommonArgs) -> Result<DesignProblem, CliError> {
    let scenario = Scenario::parse(&read_file(path)?)?;
    let mut problem = scenario.problem()?;
    if let Some(seed) = common.seed {
        problem.options.seed = seed;
    }
    if let Some(tol) = common.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::usage(format!(
                "--tol must be finite and positive, got {tol}"
            )));
        }
        problem.options.residual_tol = tol;
    }
    Ok(problem)
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
enum DesignOutcome {
    Feasible {
        design: DesignRecord,
        verification: CounterexampleReport,
    },
    Infeasible {
        reason: &'static str,
        detail: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        retries: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        best_separation: Option<f64>,
    },
}

impl Text for DesignOutcome {
    fn text(&self) -> String {
        match self {
            DesignOutcome::Feasible {
                design,
                verification,
            } => {
                let mut s = format!(
                    "feasible: n = {}, L = {}, residual {:.3e}, retries used {}\n",
                    design.n, design.order, design.residual, design.retries_used
                );
                let _ = writeln!(s, "coefficients: {}", fmt_vec(design.coeffs.taps()));
                s.push_str("shift:\n");
                for row in &design.shift {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x:>10.6}")).collect();
                    let _ = writeln!(s, "  {}", cells.join(" "));
                }
                let labels: Vec<String> = design
                    .grouping
                    .eigenvalues
                    .iter()
                    .zip(&design.grouping.labels)
                    .map(|(v, l)| format!("{v:.6} ({})", format!("{l:?}").to_lowercase()))
                    .collect();
                let _ = writeln!(s, "eigenvalues: {}", labels.join(", "));
                s.push_str(&verification.to_string());
                s
            }
            DesignOutcome::Infeasible { detail, .. } => format!("infeasible: {detail}\n"),
        }
    }
}

pub(super) fn design(a: &DesignArgs) -> Result<(i32, String), CliError> {
    let problem = load_problem(&a.scenario, &a.common)?;
    let (code, body) = match feasible_shift(&problem) {
        Ok(result) => {
            let verification = verify_design(&result, &problem)?;
            let code = exit_code(verification.overall);
            (
                code,
                DesignOutcome::Feasible {
                    design: DesignRecord::from(&result),
                    verification,
                },
            )
        }
        Err(Error::Infeasible(inf)) => {
            let (retries, best_separation) = match inf {
                crate::design::Infeasible::GroupingFailed {
                    retries,
                    best_separation,
                } => (Some(retries), Some(best_separation)),
                crate::design::Infeasible::OnlyZero => (None, None),
            };
            let body = DesignOutcome::Infeasible {
                reason: inf.reason(),
                detail: inf.to_string(),
                retries,
                best_separation,
            };
            (EXIT_INFEASIBLE, body)
        }
        Err(e) => return Err(e.into()),
    };
    Ok((code, render(&a.common, "design", &body)?))
}

// simulate

#[derive(Serialize)]
struct SimulateReport {
    n: usize,
    order: usize,
    coeffs: FilterCoefficients,
    design_source: &'static str,
    signal: Vec<f64>,
    y: Vec<f64>,
    y_central: Vec<f64>,
    /// `U∥U∥ᵀ x`, for reference.
    projection: Vec<f64>,
    max_abs_diff: f64,
    projection_error: f64,
    pass: bool,
    stats: CommStats,
}

impl Text for SimulateReport {
    fn text(&self) -> String {
        let mut s = format!(
            "simulate: n = {}, L = {} (design {})\n",
            self.n, self.order, self.design_source
        );
        let _ = writeln!(s, "x          = {}", fmt_vec(&self.signal));
        let _ = writeln!(s, "y          = {}", fmt_vec(&self.y));
        let _ = writeln!(s, "y_central  = {}", fmt_vec(&self.y_central));
        let _ = writeln!(s, "P x        = {}", fmt_vec(&self.projection));
        let _ = writeln!(
            s,
            "rounds {}, messages {}, scalars {}",
            self.stats.rounds, self.stats.messages, self.stats.scalar_payloads
        );
        let _ = writeln!(
            s,
            "max |y - y_central| = {:.3e}, max |y - P x| = {:.3e}",
            self.max_abs_diff, self.projection_error
        );
        let _ = writeln!(s, "agreement: {}", mark(self.pass));
        s
    }
}

pub(super) fn simulate(a: &SimulateArgs) -> Result<(i32, String), CliError> {
    let problem = load_problem(&a.scenario, &a.common)?;
    let n = problem.n();
    let (shift, coeffs, source): (ShiftMatrix, FilterCoefficients, _) = match &a.design {
        Some(path) => {
            let file: DesignFile = super::scenario::parse_json(&read_file(path)?)?;
            (file.design.shift(n)?, file.design.coeffs, "file")
        }
        None => {
            let d = feasible_shift(&problem)?;
            (d.shift, d.coeffs, "computed")
        }
    };
    let x = match &a.signal {
        Some(v) if v.len() != n => {
            return Err(CliError::usage(format!(
                "--signal has {} entries, scenario has n = {n}",
                v.len()
            )))
        }
        Some(v) => DVector::from_column_slice(v),
        None => gaussian_matrix(n, 1, &mut seeded_rng(a.common.seed.unwrap_or(0)))
            .column(0)
            .into_owned(),
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CliError::usage("--signal entries must be finite"));
    }

    let cmp = compare_with_centralized(&problem.topology, &shift, &coeffs, &x)?;
    let px = projector(&problem.basis).apply(&x);
    let body = SimulateReport {
        n,
        order: coeffs.order(),
        coeffs,
        design_source: source,
        signal: x.as_slice().to_vec(),
        projection_error: (&cmp.y_decentral - &px).amax(),
        y: cmp.y_decentral.as_slice().to_vec(),
        y_central: cmp.y_central.as_slice().to_vec(),
        projection: px.as_slice().to_vec(),
        max_abs_diff: cmp.max_abs_diff,
        pass: cmp.pass,
        stats: cmp.stats,
    };
    Ok((exit_code(cmp.pass), render(&a.common, "simulate", &body)?))
}

// rank-demo

#[derive(Serialize)]
struct RankRow {
    n: usize,
    m: usize,
    max_rank: usize,
    max_rank_triangular: usize,
    max_rank_reduced: usize,
    reduced_rows: usize,
    bound_holds: bool,
    n2: i64,
    vacuous: bool,
    boundary: bool,
}

#[derive(Serialize)]
struct RankDemoReport {
    seed: u64,
    trials: u64,
    pass: bool,
    rows: Vec<RankRow>,
}

impl Text for RankDemoReport {
    fn text(&self) -> String {
        let mut s = format!(
            "power-basis rank vs the Cayley-Hamilton bound ({} trials, seed {})\n",
            self.trials, self.seed
        );
        s.push_str("   n    m  max rank  triangular  T'' rank/rows    n2  verdict\n");
        for r in &self.rows {
            let verdict = if r.vacuous {
                format!("n2 = {} > {} (vacuous)", r.n2, r.n)
            } else if r.boundary {
                format!("n2 = {} = n (boundary)", r.n2)
            } else {
                format!("n2 = {} < {}", r.n2, r.n)
            };
            let _ = writeln!(
                s,
                "{:>4} {:>4} {:>9} {:>11} {:>9}/{:<5} {:>4}  {}{}",
                r.n,
                r.m,
                r.max_rank,
                r.max_rank_triangular,
                r.max_rank_reduced,
                r.reduced_rows,
                r.n2,
                verdict,
                if r.bound_holds {
                    ""
                } else {
                    "  BOUND VIOLATED"
                }
            );
        }
        let _ = writeln!(s, "bound never violated: {}", mark(self.pass));
        s
    }
}

pub(super) fn rank_demo(a: &RankDemoArgs) -> Result<(i32, String), CliError> {
    let seed = a.common.seed.unwrap_or(0);
    let mut rows = Vec::new();
    for n in a.n.clone() {
        let m = a.m.unwrap_or(2 * n);
        let ch = cayley_hamilton_demo(n, m, a.trials as usize, seed.wrapping_add(n as u64))?;
        let v = sufficiency_vacuity(n, n);
        rows.push(RankRow {
            n,
            m,
            max_rank: ch.max_rank_general,
            max_rank_triangular: ch.max_rank_triangular,
            max_rank_reduced: ch.max_rank_reduced,
            reduced_rows: ch.reduced_rows,
            bound_holds: ch
                .max_rank_general
                .max(ch.max_rank_triangular)
                .max(ch.max_rank_reduced)
                <= n,
            n2: v.n2,
            vacuous: v.vacuous,
            boundary: v.n2 == n as i64,
        });
    }
    let pass = rows.iter().all(|r| r.bound_holds);
    let body = RankDemoReport {
        seed,
        trials: a.trials,
        pass,
        rows,
    };
    Ok((exit_code(pass), render(&a.common, "rank-demo", &body)?))
}
