use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

use orthores::validation::random::{
    normal_matrix, orthogonal, orthonormal_columns, rng_for_stream,
};
use orthores::validation::{
    benchmark_apply, cheng_matrix, idempotent_check, monte_carlo, oracle_compare,
    verify_ss_condition, verify_student_roots, BenchReport, Construction, SimulationConfig,
    SimulationReport,
};
use orthores::{
    fit_least_squares, householder_qr, independent_residuals, rank_count, standard_projector,
    standardize_predictor, student_w, univariate_w, DenseMatrix, IndependentResiduals,
    RowSelection, SignPolicy, StudentVariant, UnivariateVariant,
};

use crate::dataset::{read_dataset, Dataset};
use crate::exit::{input_error, Exit, CHECK, IDENTITY};
use crate::output::{emit, RunManifest};
use crate::{Cli, Command, ConstructionArg, Mode, Policy, Variant};

pub fn run(cli: &Cli) -> Result<()> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(input_error(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    match &cli.command {
        Command::Qr { input, policy } => cmd_qr(cli, input, *policy),
        Command::Residuals { input } => cmd_residuals(cli, input),
        Command::Indep {
            input,
            mode,
            variant,
            rows,
        } => cmd_indep(cli, input, *mode, *variant, rows.as_deref()),
        Command::Simulate {
            n,
            p,
            sigma,
            reps,
            construction,
        } => cmd_simulate(cli, *n, *p, *sigma, *reps, *construction),
        Command::Check {
            n_grid,
            trials,
            inject_fault,
        } => cmd_check(cli, n_grid, *trials, inject_fault.as_deref()),
        Command::Bench { n_grid, p, repeats } => cmd_bench(cli, n_grid, *p, *repeats),
    }
}

fn load(input: &Path) -> Result<Dataset> {
    read_dataset(input)
}

fn describe(manifest: RunManifest, data: &Dataset) -> RunManifest {
    match &data.header {
        Some(names) => manifest.flag("header", names.join(",")),
        None => manifest,
    }
}

fn matrix_of(columns: &[Vec<f64>]) -> Result<DenseMatrix> {
    DenseMatrix::from_columns(columns).context("building the design matrix")
}

#[derive(Serialize)]
struct QrOutput {
    #[serde(rename = "T")]
    t: Vec<Vec<f64>>,
    reflector_norms: Vec<f64>,
    rank_count: usize,
}

fn cmd_qr(cli: &Cli, input: &Path, policy: Policy) -> Result<()> {
    let data = load(input)?;
    let x = matrix_of(&data.columns)?;
    let (sign_policy, name) = match policy {
        Policy::Standard => (SignPolicy::Standard, "standard"),
        Policy::ToPositive => (SignPolicy::ToPositive, "to-positive"),
    };
    let qr = householder_qr(&x, sign_policy)
        .with_context(|| format!("factoring {}", input.display()))?;
    let body = QrOutput {
        t: qr.t().to_rows(),
        reflector_norms: qr.reflector_norms(),
        rank_count: rank_count(&qr, &x)?,
    };
    let manifest = describe(
        RunManifest::new("qr", Some(input), cli.out.as_ref()).flag("policy", name),
        &data,
    );
    emit(&manifest, &body, cli.out.as_ref())
}

#[derive(Serialize)]
struct ResidualsOutput {
    beta_hat: Vec<f64>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    rss: f64,
}

/// `[y]` alone means an intercept-only fit, otherwise `[x1..xp, y]`.
fn split_response(data: &Dataset) -> Result<(DenseMatrix, Vec<f64>)> {
    let (y, xs) = data.columns.split_last().expect("at least one column");
    let x = if xs.is_empty() {
        DenseMatrix::new(data.rows(), 1, vec![1.0; data.rows()])?
    } else {
        matrix_of(xs)?
    };
    if data.rows() <= x.cols() {
        return Err(input_error(format!(
            "need more data rows ({}) than predictors ({})",
            data.rows(),
            x.cols()
        )));
    }
    Ok((x, y.clone()))
}

fn cmd_residuals(cli: &Cli, input: &Path) -> Result<()> {
    let data = load(input)?;
    let (x, y) = split_response(&data)?;
    let fit = fit_least_squares(&x, &y)?;
    let manifest = describe(
        RunManifest::new("residuals", Some(input), cli.out.as_ref()),
        &data,
    );
    let body = ResidualsOutput {
        beta_hat: fit.beta_hat,
        r: fit.residuals,
        rss: fit.rss,
    };
    emit(&manifest, &body, cli.out.as_ref())
}

#[derive(Serialize)]
struct IndepOutput {
    #[serde(rename = "W")]
    w: Vec<f64>,
    v: Vec<f64>,
    beta_star: Vec<f64>,
    rss: f64,
    wss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    predictor_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predictor_scale: Option<f64>,
}

fn expect_width(data: &Dataset, width: usize, mode: &str) -> Result<()> {
    if data.width() != width {
        return Err(input_error(format!(
            "{mode} mode expects {width} column(s), the input has {}",
            data.width()
        )));
    }
    Ok(())
}

fn cmd_indep(
    cli: &Cli,
    input: &Path,
    mode: Mode,
    variant: Option<Variant>,
    rows: Option<&[usize]>,
) -> Result<()> {
    let data = load(input)?;
    let mut manifest = describe(
        RunManifest::new("indep", Some(input), cli.out.as_ref()),
        &data,
    );
    if rows.is_some() && mode != Mode::General {
        return Err(input_error("--rows applies only to general mode"));
    }
    let (ir, rss, predictor): (IndependentResiduals, f64, Option<(f64, f64)>) = match mode {
        Mode::Student => {
            expect_width(&data, 1, "student")?;
            let (v, name) = match variant {
                None | Some(Variant::Minus) => (StudentVariant::Minus, "minus"),
                Some(Variant::Plus) => (StudentVariant::Plus, "plus"),
                Some(other) => {
                    return Err(input_error(format!(
                        "variant {other:?} is not valid in student mode (use minus or plus)"
                    )))
                }
            };
            manifest = manifest.flag("mode", "student").flag("variant", name);
            let y = &data.columns[0];
            let ir = student_w(y, v)?;
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let rss = y.iter().map(|v| (v - mean).powi(2)).sum();
            (ir, rss, None)
        }
        Mode::Univariate => {
            expect_width(&data, 2, "univariate")?;
            let (v, name) = match variant {
                None | Some(Variant::B) => (UnivariateVariant::B, "b"),
                Some(Variant::A) => (UnivariateVariant::A, "a"),
                Some(other) => {
                    return Err(input_error(format!(
                        "variant {other:?} is not valid in univariate mode (use a or b)"
                    )))
                }
            };
            manifest = manifest.flag("mode", "univariate").flag("variant", name);
            let pred = standardize_predictor(&data.columns[0])?;
            let y = &data.columns[1];
            let ir = univariate_w(&pred, y, v)?;
            let x = DenseMatrix::from_columns(&[vec![1.0; y.len()], pred.t.clone()])?;
            let rss = fit_least_squares(&x, y)?.rss;
            (ir, rss, Some((pred.shift, pred.scale)))
        }
        Mode::General => {
            if data.width() < 2 {
                return Err(input_error(
                    "general mode expects predictor columns followed by the response",
                ));
            }
            if variant.is_some() {
                return Err(input_error("general mode takes no --variant"));
            }
            let (x, y) = split_response(&data)?;
            let (n, p) = x.shape();
            let sel = match rows {
                Some(r) => RowSelection::new(r.to_vec(), n)?,
                None => RowSelection::first(p, n)?,
            };
            manifest = manifest.flag("mode", "general");
            manifest.selection = Some(sel.indices().to_vec());
            let fit = fit_least_squares(&x, &y)?;
            let (_, sp) = standard_projector(&x, &sel)?;
            let rss = fit.rss;
            (independent_residuals(&fit, &sp, &sel)?, rss, None)
        }
    };
    if manifest.selection.is_none() {
        manifest.selection = Some(ir.selection.indices().to_vec());
    }

    let wss = ir.wss();
    let gap = if rss > 0.0 {
        (wss - rss).abs() / rss
    } else {
        wss
    };
    if !(gap < cli.tol) {
        return Err(Exit::error(
            IDENTITY,
            format!("sum-of-squares identity violated: wss = {wss}, rss = {rss}, gap {gap:e}"),
        ));
    }
    let body = IndepOutput {
        w: ir.w,
        v: ir.v,
        beta_star: ir.beta_star,
        rss,
        wss,
        predictor_shift: predictor.map(|p| p.0),
        predictor_scale: predictor.map(|p| p.1),
    };
    emit(&manifest, &body, cli.out.as_ref())
}

#[derive(Serialize)]
struct SimulateOutput {
    config: SimulationConfig,
    report: SimulationReport,
}

fn cmd_simulate(
    cli: &Cli,
    n: usize,
    p: usize,
    sigma: f64,
    reps: usize,
    construction: ConstructionArg,
) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let mut config = SimulationConfig::new(n, p, sigma, reps, seed);
    config.construction = match construction {
        ConstructionArg::Generic => Construction::Generic,
        ConstructionArg::StudentMinus => Construction::StudentMinus,
        ConstructionArg::StudentPlus => Construction::StudentPlus,
        ConstructionArg::UnivariateA => Construction::UnivariateA,
        ConstructionArg::UnivariateB => Construction::UnivariateB,
    };
    let report = monte_carlo(&config)?;
    let mut manifest = RunManifest::new("simulate", None, cli.out.as_ref())
        .flag("n", n)
        .flag("p", p)
        .flag("sigma", sigma)
        .flag("reps", reps)
        .flag(
            "construction",
            construction
                .to_possible_value()
                .expect("no skipped variants")
                .get_name(),
        );
    manifest.seed = Some(seed);
    emit(
        &manifest,
        &SimulateOutput { config, report },
        cli.out.as_ref(),
    )
}

#[derive(Serialize)]
struct OracleRow {
    n: usize,
    p: usize,
    max_error: f64,
}

#[derive(Serialize)]
struct RootsRow {
    n: usize,
    c_plus: f64,
    c_minus: f64,
}

#[derive(Serialize)]
struct CheckOutput {
    oracle_max_error: f64,
    oracle: Vec<OracleRow>,
    student_roots: Vec<RootsRow>,
    student_roots_pass: bool,
    ss_condition_pass: bool,
    cheng_orthonormality_error: f64,
    idempotency_pass: bool,
    failed_checks: Vec<String>,
}

const CHECK_NAMES: [&str; 5] = [
    "oracle",
    "student-roots",
    "ss-condition",
    "cheng",
    "idempotency",
];

fn cmd_check(cli: &Cli, n_grid: &[usize], trials: usize, inject: Option<&str>) -> Result<()> {
    if n_grid.is_empty() || n_grid.iter().any(|&n| n < 2) {
        return Err(input_error("--n-grid needs values of at least 2"));
    }
    if let Some(name) = inject {
        if !CHECK_NAMES.contains(&name) {
            return Err(input_error(format!(
                "unknown check {name:?}; expected one of {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    let seed = cli.seed.unwrap_or(0);
    let mut rng = rng_for_stream(seed, 0);

    let mut oracle = Vec::new();
    let mut roots = Vec::new();
    let mut roots_pass = true;
    let mut ss_pass = true;
    let mut cheng_err = 0.0f64;
    let mut idem_pass = true;
    for (i, &n) in n_grid.iter().enumerate() {
        let p = (n - 1).min(3);
        let x = normal_matrix(&mut rng, n, p);
        let ones = DenseMatrix::new(n, 1, vec![1.0; n])?;
        let err = oracle_compare(&x, trials, seed.wrapping_add(i as u64))?.max(oracle_compare(
            &ones,
            trials,
            seed.wrapping_add(i as u64),
        )?);
        oracle.push(OracleRow {
            n,
            p,
            max_error: err,
        });

        match verify_student_roots(n) {
            Ok((c_plus, c_minus)) => roots.push(RootsRow { n, c_plus, c_minus }),
            Err(_) => roots_pass = false,
        }

        let xo = orthonormal_columns(&mut rng, n, p);
        let sel = RowSelection::first(p, n)?;
        let q = orthogonal(&mut rng, p);
        let s = q.sub(&xo.select_rows(sel.indices()))?.inverse()?;
        let bumped = s.add(&normal_matrix(&mut rng, p, p).scale(0.1))?;
        ss_pass &= verify_ss_condition(&s, &xo, &sel)? && !verify_ss_condition(&bumped, &xo, &sel)?;

        let m = cheng_matrix(n)?.m;
        let ones_gap = m
            .tr_matvec(&vec![1.0; n])?
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        cheng_err = cheng_err.max(m.orthonormality_error()).max(ones_gap);

        let b = DenseMatrix::identity(n).sub(&xo.matmul(&xo.transpose())?)?;
        idem_pass &=
            idempotent_check(&b)? && !idempotent_check(&DenseMatrix::identity(n).scale(2.0))?;
    }

    let mut oracle_max = oracle.iter().fold(0.0f64, |m, r| m.max(r.max_error));
    match inject {
        Some("oracle") => oracle_max = oracle_max.max(1.0),
        Some("student-roots") => roots_pass = false,
        Some("ss-condition") => ss_pass = false,
        Some("cheng") => cheng_err = cheng_err.max(1.0),
        Some("idempotency") => idem_pass = false,
        _ => {}
    }
    let verdicts = [
        ("oracle", oracle_max < cli.tol),
        ("student-roots", roots_pass),
        ("ss-condition", ss_pass),
        ("cheng", cheng_err < cli.tol),
        ("idempotency", idem_pass),
    ];
    let failed: Vec<String> = verdicts
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.to_string())
        .collect();

    let mut manifest = RunManifest::new("check", None, cli.out.as_ref())
        .flag("n_grid", join(n_grid))
        .flag("trials", trials)
        .flag("tol", cli.tol);
    if let Some(name) = inject {
        manifest = manifest.flag("inject_fault", name);
    }
    manifest.seed = Some(seed);
    let body = CheckOutput {
        oracle_max_error: oracle_max,
        oracle,
        student_roots: roots,
        student_roots_pass: roots_pass,
        ss_condition_pass: ss_pass,
        cheng_orthonormality_error: cheng_err,
        idempotency_pass: idem_pass,
        failed_checks: failed.clone(),
    };
    emit(&manifest, &body, cli.out.as_ref())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Exit::error(
            CHECK,
            format!("failed checks: {}", failed.join(", ")),
        ))
    }
}

fn cmd_bench(cli: &Cli, n_grid: &[usize], p: usize, repeats: usize) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let report: BenchReport = benchmark_apply(n_grid, p, repeats, seed)?;
    let mut manifest = RunManifest::new("bench", None, cli.out.as_ref())
        .flag("n_grid", join(n_grid))
        .flag("p", p)
        .flag("repeats", repeats);
    manifest.seed = Some(seed);
    emit(&manifest, &report, cli.out.as_ref())
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
