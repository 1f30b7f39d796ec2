use crate::args::{self, Cli, Common, Format, MetricArgs, OdeArgs, PdeArgs, PoincareArgs, Resolved, VerifyArgs};
use crate::output::{self, num};
use crate::{ChecksFailed, InputError};
use anyhow::Result;
use finpoisson::checks::{self, CheckReport, Expected, FormulaDiscrepancy, SuiteOptions};
use finpoisson::model_spaces as disc;
use finpoisson::poisson::{self, BallKind, GridProblem};
use finpoisson::radial_ode::{residual_profile, solve_q, OdeParams};
use finpoisson::randers::{MinkowskiNorm, RandersStructure};
use finpoisson::special::closed_form_case;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub fn run(cli: Cli) -> Result<()> {
    let (common, resolved) = args::resolve(cli)?;
    match resolved {
        Resolved::Metric(a) => metric(&common, a),
        Resolved::Ode(a) => ode(&common, a),
        Resolved::Pde(a) => pde(&common, a),
        Resolved::Verify(a) => verify(&common, a),
        Resolved::Poincare(a) => poincare_table(&common, a),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, InputError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(InputError(format!("{name} must be finite")))
    }
}

fn metric(common: &Common, a: MetricArgs) -> Result<()> {
    let structure = match &a.structure {
        Some(path) => {
            if a.b.is_some() || a.phi.is_some() {
                return Err(InputError("give either a structure file or b/phi, not both".into()).into());
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
            RandersStructure::from_json(&text)?
        }
        None => {
            let (b, phi) = (finite("b", a.b.unwrap_or(0.0))?, finite("phi", a.phi.unwrap_or(0.0))?);
            RandersStructure::randers_euclidean(&[b * phi.cos(), b * phi.sin()])?
        }
    };
    let dim = structure.dim();
    let unit = |k: usize| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let x = a.x.unwrap_or_else(|| vec![0.0; dim]);
    let y = a.y.unwrap_or_else(|| unit(0));
    let alpha = a.alpha.unwrap_or_else(|| unit(0));
    for (name, v) in [("x", &x), ("y", &y), ("alpha", &alpha)] {
        if v.len() != dim {
            return Err(InputError(format!("{name} must have {dim} components, got {}", v.len())).into());
        }
    }
    let norm = structure.at(&x)?;
    let neg = |v: &[f64]| v.iter().map(|c| -c).collect::<Vec<f64>>();
    let legendre = norm.legendre(&alpha)?;
    let scalars: Vec<(&str, f64)> = vec![
        ("F", norm.eval_checked(&y)?),
        ("F_reverse", norm.eval_checked(&neg(&y))?),
        ("F_sym", norm.eval_sym(&y)),
        ("F_dual", norm.eval_dual_checked(&alpha)?),
        ("F_dual_reverse", norm.eval_dual_checked(&neg(&alpha))?),
        ("F_sym_dual", norm.eval_sym_dual(&alpha)),
        ("reversibility", norm.reversibility()),
        ("uniformity", norm.uniformity()),
        ("beta_norm", norm.beta_norm()),
        ("hausdorff_density", norm.hausdorff_density()),
    ];
    let text = match common.format {
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = scalars.iter().map(|(k, v)| vec![k.to_string(), num(*v)]).collect();
            rows.extend(legendre.iter().enumerate().map(|(i, v)| vec![format!("legendre_{i}"), num(*v)]));
            output::csv(&["quantity", "value"], rows)?
        }
        Format::Json => {
            let mut body = serde_json::Map::new();
            body.insert("command".into(), json!("metric"));
            body.insert("structure".into(), json!(structure.kind()));
            body.insert("x".into(), json!(x));
            body.insert("y".into(), json!(y));
            body.insert("alpha".into(), json!(alpha));
            body.insert("legendre".into(), json!(legendre));
            for (k, v) in scalars {
                body.insert(k.into(), json!(v));
            }
            output::json(Value::Object(body))?
        }
    };
    output::emit(&text, common.out.as_deref())
}

fn ode(common: &Common, a: OdeArgs) -> Result<()> {
    let n = a.n.ok_or_else(|| InputError("--n is required".into()))?;
    let rho = a.rho.unwrap_or(1.0);
    let mut p = OdeParams::new(n, a.mu.unwrap_or(0.0), a.c.unwrap_or(0.0), rho)?;
    if let Some(g) = a.grid {
        p = p.with_grid(g);
    }
    if let Some(e) = a.eps {
        p = p.with_eps(e);
    }
    if let Some(t) = a.tol {
        p = p.with_tol(t);
    }
    if let Some(l) = a.lambda {
        p = p.with_lambda(l);
    }
    p.validate()?;
    let sol = solve_q(&p)?;
    let residual = residual_profile(&sol, &p);
    let text = match common.format {
        Format::Csv => {
            let rows = (0..sol.r.len()).map(|i| vec![num(sol.r[i]), num(sol.f[i]), num(sol.fp[i]), num(residual[i])]);
            output::csv(&["r", "f", "fprime", "residual"], rows)?
        }
        Format::Json => {
            let nodes: Vec<Value> = (0..sol.r.len())
                .map(|i| json!({"r": sol.r[i], "f": sol.f[i], "fprime": sol.fp[i], "residual": residual[i]}))
                .collect();
            let case = closed_form_case(&p.sigma).map(|c| format!("{c:?}"));
            output::json(json!({
                "command": "ode",
                "params": {
                    "n": n, "mu": p.sigma.mu, "c": p.sigma.c, "rho": rho, "grid": p.grid_n,
                    "eps": p.eps, "tol": p.rk_tol, "lambda": p.lambda,
                },
                "mu_bar": p.sigma.mu_bar(),
                "alpha_plus": p.sigma.alpha_plus(),
                "closed_form": case,
                "a_hom": sol.a_hom,
                "energy": sol.energy,
                "residual_max": sol.residual_max,
                "steps": sol.steps,
                "nodes": nodes,
            }))?
        }
    };
    output::emit(&text, common.out.as_deref())
}

fn pde(common: &Common, a: PdeArgs) -> Result<()> {
    let ball: BallKind = a.ball.as_deref().unwrap_or("forward").parse()?;
    let (b, phi) = (finite("b", a.b.unwrap_or(0.0))?, finite("phi", a.phi.unwrap_or(0.0))?);
    let rho = a.rho.unwrap_or(1.0);
    let grid_n = a.grid_n.unwrap_or(161);
    let seed = a.seed.unwrap_or(42);
    let norm = MinkowskiNorm::new(2, &[1.0, 0.0, 0.0, 1.0], &[b * phi.cos(), b * phi.sin()])?;
    let p = GridProblem::new(norm, [0.0, 0.0], rho, ball, grid_n)?;
    let dom = poisson::build_domain(&p)?;
    let sol = poisson::solve(&p, &dom)?;
    let second = poisson::solve_random_init(&p, &dom, seed)?;
    let agreement = sol.u.iter().zip(&second.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let sandwich = poisson::backward_sandwich(&p, &dom, &sol.u);
    let profile_error = match ball {
        BallKind::Forward => Some(poisson::forward_error(&p, &dom, &sol.u)),
        BallKind::Backward => None,
    };
    let summary = json!({
        "command": "pde",
        "params": {"ball": ball, "b": b, "phi": phi, "rho": rho, "N": grid_n, "seed": seed},
        "reversibility": p.norm.reversibility(),
        "h": dom.h,
        "nodes": dom.len(),
        "iterations": sol.iterations,
        "stop": sol.stop,
        "residual": sol.residual,
        "energy": sol.energy,
        "max_u": sol.max_abs(),
        "energy_monotone": sol.monotone(),
        "profile_error": profile_error,
        "two_start_agreement": agreement,
        "sandwich": sandwich,
    });
    let rows = poisson::grid_rows(&p, &dom, &sol.u);
    match common.format {
        Format::Csv => {
            let text = output::csv(
                &["i", "j", "x", "y", "u", "lower_bound", "upper_bound"],
                rows.iter().map(|r| {
                    vec![
                        r.i.to_string(),
                        r.j.to_string(),
                        num(r.x),
                        num(r.y),
                        num(r.u),
                        num(r.lower_bound),
                        num(r.upper_bound),
                    ]
                }),
            )?;
            output::emit(&text, common.out.as_deref())?;
            let summary = output::json(summary)?;
            match &common.out {
                Some(path) => {
                    let mut s = path.clone().into_os_string();
                    s.push(".summary.json");
                    output::emit(&summary, Some(&PathBuf::from(s)))?;
                }
                None => eprint!("{summary}"),
            }
            Ok(())
        }
        Format::Json => {
            let mut body = summary;
            body["grid"] = serde_json::to_value(&rows)?;
            output::emit(&output::json(body)?, common.out.as_deref())
        }
    }
}

enum Job {
    Suite(&'static str),
    Bessel,
}

type JobResult = finpoisson::Result<(Vec<CheckReport>, Vec<FormulaDiscrepancy>)>;

fn thread_cap() -> Result<usize, InputError> {
    match std::env::var("FINPOISSON_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(InputError(format!("FINPOISSON_THREADS must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Runs the jobs on up to `threads` workers; results keep the job order.
fn run_jobs(jobs: &[Job], opts: &SuiteOptions, threads: usize) -> Vec<JobResult> {
    let slots: Vec<Mutex<Option<JobResult>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(job) = jobs.get(k) else { break };
        let res = match job {
            Job::Suite(name) => checks::run_suite(name, opts).map(|r| (r, Vec::new())),
            Job::Bessel => checks::bessel_discrepancy_study(opts),
        };
        *slots[k].lock().unwrap() = Some(res);
    };
    std::thread::scope(|s| {
        for _ in 1..threads.min(jobs.len()) {
            s.spawn(work);
        }
        work();
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every job ran")).collect()
}

fn verify(common: &Common, a: VerifyArgs) -> Result<()> {
    let tol_scale = a.tol_scale.unwrap_or(1.0);
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(InputError(format!("tol-scale must be positive, got {tol_scale}")).into());
    }
    let samples = a.samples.unwrap_or(1000);
    if samples == 0 {
        return Err(InputError("samples must be positive".into()).into());
    }
    let opts = SuiteOptions { tol_scale, seed: a.seed.unwrap_or(42), samples };
    let suite = a.suite.unwrap_or_else(|| "all".into());
    let jobs: Vec<Job> = match suite.as_str() {
        "all" => checks::SUITES.iter().map(|s| Job::Suite(s)).chain([Job::Bessel]).collect(),
        "bessel" => vec![Job::Bessel],
        name => match checks::SUITES.iter().find(|s| **s == name) {
            Some(s) => vec![Job::Suite(s)],
            None => {
                let known = checks::SUITES.join(", ");
                return Err(InputError(format!("unknown suite '{name}' (known: {known}, bessel, all)")).into());
            }
        },
    };
    let mut reports = Vec::new();
    let mut discrepancies = Vec::new();
    for res in run_jobs(&jobs, &opts, thread_cap()?) {
        let (r, d) = res?;
        reports.extend(r);
        discrepancies.extend(d);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    let text = match common.format {
        Format::Csv => output::csv(
            &["id", "expected", "expected_provenance", "computed", "tol", "pass", "notes"],
            reports.iter().map(|r| {
                let expected = match r.expected {
                    Expected::Value(v) => num(v),
                    Expected::Divergent => "divergent".into(),
                };
                let prov = serde_json::to_value(r.expected_provenance).ok().and_then(|v| v.as_str().map(String::from));
                vec![
                    r.id.clone(),
                    expected,
                    prov.unwrap_or_default(),
                    num(r.computed),
                    num(r.tol),
                    r.pass.to_string(),
                    r.notes.clone(),
                ]
            }),
        )?,
        Format::Json => output::json(json!({
            "command": "verify",
            "suite": suite,
            "seed": opts.seed,
            "tol_scale": opts.tol_scale,
            "samples": opts.samples,
            "pass": failed.is_empty(),
            "failed": failed,
            "checks": reports,
            "discrepancies": discrepancies,
        }))?,
    };
    output::emit(&text, common.out.as_deref())?;
    for d in &discrepancies {
        eprintln!(
            "suspected formula discrepancy {}: relative difference {:.3e} against {} (spread {:.3e})",
            d.id, d.max_rel_diff, d.oracle, d.oracle_spread
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        for id in &failed {
            eprintln!("FAIL {id}");
        }
        Err(ChecksFailed(failed.len()).into())
    }
}

fn poincare_table(common: &Common, a: PoincareArgs) -> Result<()> {
    let points = a.points.unwrap_or(99);
    if points == 0 {
        return Err(InputError("points must be positive".into()).into());
    }
    let mut rows = Vec::with_capacity(points);
    for k in 1..=points {
        let r = 2.0 * k as f64 / (points + 1) as f64;
        let plus = disc::poincare_dual_along_distance(r, 1)?;
        let minus = disc::poincare_dual_along_distance(r, -1)?;
        rows.push([
            r,
            disc::poincare_dist_from_origin(r)?,
            disc::poincare_dist_to_origin(r)?,
            disc::poincare_density(r)?,
            disc::poincare_reversibility(r)?,
            plus.closed_form,
            plus.from_dual,
            minus.closed_form,
            minus.from_dual,
        ]);
    }
    const HEADER: [&str; 9] = [
        "r",
        "dist_from_origin",
        "dist_to_origin",
        "density",
        "reversibility",
        "dual_plus_closed",
        "dual_plus",
        "dual_minus_closed",
        "dual_minus",
    ];
    let text = match common.format {
        Format::Csv => output::csv(&HEADER, rows.iter().map(|row| row.iter().map(|v| num(*v)).collect()))?,
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|row| Value::Object(HEADER.iter().zip(row).map(|(k, v)| (k.to_string(), json!(v))).collect()))
                .collect();
            output::json(json!({
                "command": "poincare",
                "total_volume": disc::poincare_total_volume()?,
                "rows": table,
            }))?
        }
    };
    output::emit(&text, common.out.as_deref())
}
