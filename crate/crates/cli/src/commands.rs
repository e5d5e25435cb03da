use std::fmt::Display;

use bochner_core::bernstein::BernsteinFunction;
use bochner_core::constants::EuclideanConstants;
use bochner_core::legendre::{beta_to_nash, nash_to_beta, NashFunction, RateFunction};
use bochner_core::spectral::{
    check_decay, check_elementary, check_nash, check_super_poincare, estimate_profile, fourier_rate,
    fourier_rate_function, hash_values, random_functions, ModelKind, Phi, Report, SampleSet, SpectralModel,
};
use bochner_core::subordination::{
    poisson_measure, stable_half_measure, subordinate_semigroup, symbol_semigroup, SubordinatorMeasure,
};
use bochner_core::transforms::{
    asymptotics_report, transfer_beta, transfer_convex, transfer_nash, ConvexPsi, Sandwich,
};
use bochner_core::ultra::{coulhon_bound, norm_1_to_2_squared, Theta};
use bochner_core::Error;

use crate::args::{Command, Options};
use crate::grid::{parse_int_list, parse_list, GridSpec};
use crate::output::{Cell, Table};

/// Input problems exit with 2, failures during computation with 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

type Res<T> = Result<T, Failure>;

fn cfg<E: Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn rt<E: Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

/// A rendered table and whether anything it checked was violated.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub violations: bool,
}

impl Outcome {
    fn clean(table: Table) -> Self {
        Self {
            table,
            violations: false,
        }
    }
}

pub fn execute(command: &Command, o: &Options) -> Res<Outcome> {
    if let Some(c) = &o.command {
        if c != command.id() {
            return Err(cfg(format!("config is for `{c}`, not `{}`", command.id())));
        }
    }
    match command {
        Command::Constants(_) => constants(o),
        Command::Transform(_) => transform(o),
        Command::Nash(_) => nash(o),
        Command::Verify(_) => verify(o),
        Command::Ultra(_) => ultra(o),
        Command::SubordinateCheck(_) => subordinate_check(o),
        Command::Profile(_) => profile(o),
    }
}

fn need<'a>(v: &'a Option<String>, flag: &str, command: &str) -> Res<&'a str> {
    v.as_deref().ok_or_else(|| cfg(format!("`{command}` needs --{flag}")))
}

fn parse_g(spec: &str) -> Res<BernsteinFunction> {
    spec.parse().map_err(cfg)
}

fn grid(g: Option<GridSpec>, default: &str) -> Vec<f64> {
    g.unwrap_or_else(|| default.parse().expect("default grids are valid"))
        .points()
}

fn parse_model(spec: &str) -> Res<SpectralModel> {
    SpectralModel::from_spec(spec).map_err(cfg)
}

/// Rate specs, plus `fourier` for the spectral-counting rate of a torus model.
fn parse_rate(spec: &str, model: Option<&SpectralModel>) -> Res<RateFunction> {
    if spec == "fourier" {
        let m = model.ok_or_else(|| cfg("`--beta fourier` needs a --model"))?;
        return fourier_rate_function(m, &Phi::identity()).map_err(cfg);
    }
    spec.parse().map_err(cfg)
}

fn constants(o: &Options) -> Res<Outcome> {
    let nash = o
        .nash_constant
        .ok_or_else(|| cfg("`constants` needs --nash-constant"))?;
    let ns = parse_int_list(o.n.as_deref().unwrap_or("1-20")).map_err(cfg)?;
    let alphas: Vec<f64> = match &o.alpha {
        Some(s) => parse_list(s).map_err(cfg)?,
        None => (1..=9).map(|i| i as f64 / 10.0).collect(),
    };
    let mut t = Table::new(
        "constants",
        &["n", "alpha", "nash_constant", "c_n", "l", "k", "l_lt_k", "reduction"],
    );
    let mut bad = false;
    for &n in &ns {
        for &a in &alphas {
            let c = EuclideanConstants::compute(n, a, nash).map_err(cfg)?;
            bad |= !(c.l_lt_k && c.reduction);
            t.push(vec![
                c.n.into(),
                c.alpha.into(),
                c.nash_constant.into(),
                c.c_n.into(),
                c.l.into(),
                c.k.into(),
                c.l_lt_k.into(),
                c.reduction.into(),
            ]);
        }
    }
    Ok(Outcome {
        table: t,
        violations: bad,
    })
}

fn transform(o: &Options) -> Res<Outcome> {
    if let Some(spec) = &o.nash {
        let d: NashFunction = spec.parse().map_err(cfg)?;
        let g = parse_g(need(&o.g, "g", "transform --nash")?)?;
        let dg = transfer_nash(&d, &g).map_err(rt)?;
        let sandwich = Sandwich::new(&d, &g).ok();
        let mut t = Table::new("transform", &["x", "d", "d_g", "lower", "upper"]);
        for x in grid(o.x_grid, "1e-2,1e2,9,log") {
            let (lo, hi) = sandwich.as_ref().map_or((f64::NAN, f64::NAN), |s| s.bounds(x));
            t.push(vec![
                x.into(),
                d.eval(x).into(),
                dg.eval(x).into(),
                lo.into(),
                hi.into(),
            ]);
        }
        t.meta("nash", spec.as_str());
        t.meta("g", g.name());
        return Ok(Outcome::clean(t));
    }
    let model = o.model.as_deref().map(parse_model).transpose()?;
    let beta_spec = need(&o.beta, "beta", "transform")?;
    let beta = parse_rate(beta_spec, model.as_ref())?;
    let rs = grid(o.r_grid, "1e-2,1e2,9,log");
    if let Some(spec) = &o.psi {
        let psi: ConvexPsi = spec.parse().map_err(cfg)?;
        let gamma = transfer_convex(&beta, &psi).map_err(rt)?;
        let mut t = Table::new("transform", &["r", "beta", "gamma"]);
        for r in rs {
            t.push(vec![r.into(), beta.eval(r).into(), gamma.eval(r).into()]);
        }
        t.meta("beta", beta_spec);
        t.meta("psi", spec.as_str());
        return Ok(Outcome::clean(t));
    }
    let g = parse_g(need(&o.g, "g", "transform")?)?;
    let bg = transfer_beta(&beta, &g).map_err(rt)?;
    let mut t = Table::new("transform", &["r", "beta", "beta_g"]);
    for r in rs {
        t.push(vec![r.into(), beta.eval(r).into(), bg.eval(r).into()]);
    }
    let (lo, hi) = bg.domain();
    t.meta("beta", beta_spec);
    t.meta("g", g.name());
    t.meta("domain_lo", lo);
    t.meta("domain_hi", hi);
    Ok(Outcome::clean(t))
}

fn nash(o: &Options) -> Res<Outcome> {
    if let Some(beta_spec) = &o.beta {
        let model = o.model.as_deref().map(parse_model).transpose()?;
        let beta = parse_rate(beta_spec, model.as_ref())?;
        let d = beta_to_nash(&beta).map_err(rt)?;
        let dg = match &o.g {
            Some(spec) => {
                let g = parse_g(spec)?;
                let bg = transfer_beta(&beta, &g).map_err(rt)?;
                Some(beta_to_nash(bg.rate()).map_err(rt)?)
            }
            None => None,
        };
        let cols: &[&str] = if dg.is_some() { &["x", "d", "d_g"] } else { &["x", "d"] };
        let mut t = Table::new("nash", cols);
        for x in grid(o.x_grid, "1e-2,1e2,9,log") {
            let mut row: Vec<Cell> = vec![x.into(), d.eval(x).into()];
            if let Some(dg) = &dg {
                row.push(dg.eval(x).into());
            }
            t.push(row);
        }
        t.meta("beta", beta_spec.as_str());
        return Ok(Outcome::clean(t));
    }
    let spec = need(&o.nash, "beta or --nash", "nash")?;
    let d: NashFunction = spec.parse().map_err(cfg)?;
    let beta = nash_to_beta(&d).map_err(rt)?;
    let mut t = Table::new("nash", &["r", "beta"]);
    for r in grid(o.r_grid, "1e-2,1e2,9,log") {
        t.push(vec![r.into(), beta.eval(r).into()]);
    }
    t.meta("nash", spec);
    Ok(Outcome::clean(t))
}

const CHECKS: [&str; 4] = ["super-poincare", "nash", "decay", "elementary"];

fn verify(o: &Options) -> Res<Outcome> {
    let model = parse_model(need(&o.model, "model", "verify")?)?;
    let g = parse_g(o.g.as_deref().unwrap_or("identity"))?;
    let base = parse_rate(o.beta.as_deref().unwrap_or("fourier"), Some(&model))?;
    let checks: Vec<String> = match &o.checks {
        Some(s) => s.split(',').map(|c| c.trim().to_string()).collect(),
        None => CHECKS.iter().map(|c| c.to_string()).collect(),
    };
    if let Some(c) = checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(cfg(format!(
            "unknown check `{c}`; expected one of {}",
            CHECKS.join(",")
        )));
    }
    let scale = o.scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(cfg(format!("--scale {scale} must be positive")));
    }
    let rs = grid(o.r_grid, "1e-4,1e2,20,log");
    let ts = grid(o.t_grid, "1e-4,1e1,20,log");
    let (count, seed) = (o.samples.unwrap_or(1000), o.seed.unwrap_or(0));

    let mut beta = transfer_beta(&base, &g).map_err(rt)?.into_rate();
    if scale != 1.0 {
        beta = beta.scaled(scale);
    }
    let phi = Phi::bernstein(&g);
    let samples = SampleSet::new(&model, random_functions(&model, count, seed).map_err(rt)?).map_err(rt)?;

    let mut t = Table::new(
        "verify",
        &[
            "check",
            "model",
            "phi_id",
            "rate_id",
            "n_checked",
            "n_violations",
            "worst_margin",
            "worst_input_hash",
        ],
    );
    let mut bad = false;
    for c in &checks {
        let report: Report = match c.as_str() {
            "super-poincare" => check_super_poincare(&model, &phi, &beta, &rs, &samples),
            "nash" => beta_to_nash(&beta).and_then(|d| check_nash(&model, &phi, &d, &samples)),
            "decay" => check_decay(&model, &phi, &beta, &rs, &ts, &samples),
            _ => {
                // r ↦ 1 + r keeps the grid inside (1, ∞).
                let shifted: Vec<f64> = rs.iter().map(|r| 1.0 + r).collect();
                let mut merged: Option<Report> = None;
                for &tt in &ts {
                    let r = check_elementary(&model, &phi, &beta, tt, &shifted, &samples).map_err(rt)?;
                    merged = Some(match merged {
                        Some(m) => m.merge(r),
                        None => r,
                    });
                }
                Ok(merged.expect("grids are non-empty"))
            }
        }
        .map_err(rt)?;
        bad |= !report.passed();
        t.push(vec![
            c.as_str().into(),
            report.model.into(),
            report.phi_id.into(),
            report.rate_id.into(),
            report.n_checked.into(),
            report.n_violations.into(),
            report.worst_margin.into(),
            report.worst_input_hash.into(),
        ]);
    }
    t.meta("samples", count);
    t.meta("seed", Cell::Int(seed as i64));
    t.meta("scale", scale);
    t.meta("passed", !bad);
    Ok(Outcome {
        table: t,
        violations: bad,
    })
}

fn parse_measure(spec: &str) -> Res<SubordinatorMeasure> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let p: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        parse_list(rest).map_err(cfg)?
    };
    match (kind, p.as_slice()) {
        ("poisson", [lambda, t]) => poisson_measure(*lambda, *t).map_err(cfg),
        ("stable-half", [t]) => stable_half_measure(*t).map_err(cfg),
        _ => Err(cfg(format!("measure `{spec}` is not `poisson:λ,t` or `stable-half:t`"))),
    }
}

/// Relative `L²` tolerance between the subordination and symbol routes.
const ROUTE_TOL: f64 = 1e-6;

fn subordinate_check(o: &Options) -> Res<Outcome> {
    let model = parse_model(need(&o.model, "model", "subordinate-check")?)?;
    let spec = o.measure.as_deref().unwrap_or("stable-half:1");
    let measure = parse_measure(spec)?;
    let (count, seed) = (o.samples.unwrap_or(16), o.seed.unwrap_or(0));
    let xs = grid(o.x_grid, "1e-2,1e2,20,log");
    let laplace_tol = if matches!(measure, SubordinatorMeasure::Poisson { .. }) {
        1e-12
    } else {
        1e-6
    };
    let laplace_gap = measure.laplace_gap(&xs).map_err(rt)?;
    let mass = measure.total_mass().map_err(rt)?;
    let g = measure.exponent();
    let phi = Phi::identity();

    let mut t = Table::new(
        "subordinate-check",
        &["sample", "hash", "route_gap", "l2_ratio", "l1_ratio"],
    );
    let mut bad = laplace_gap > laplace_tol;
    let mut worst: f64 = 0.0;
    for (i, f) in random_functions(&model, count, seed).map_err(rt)?.iter().enumerate() {
        let a = subordinate_semigroup(&model, &phi, &measure, f).map_err(rt)?;
        let b = symbol_semigroup(&model, &phi, &g, measure.time(), f).map_err(rt)?;
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        let gap = model.l2(&diff) / f.l2;
        let (r2, r1) = (a.l2 / f.l2, a.l1 / f.l1);
        bad |= !(gap <= ROUTE_TOL && r2 <= 1.0 + 1e-9 && r1 <= 1.0 + 1e-9);
        worst = worst.max(gap);
        t.push(vec![i.into(), f.hash().into(), gap.into(), r2.into(), r1.into()]);
    }
    t.meta("measure", spec);
    t.meta("total_mass", mass);
    t.meta("laplace_gap", laplace_gap);
    t.meta("laplace_tol", laplace_tol);
    t.meta("max_route_gap", worst);
    t.meta("passed", !bad);
    Ok(Outcome {
        table: t,
        violations: bad,
    })
}

fn parse_theta(spec: &str) -> Res<Theta> {
    match spec.split_once(':') {
        Some(("power", rest)) => match parse_list::<f64>(rest).map_err(cfg)?.as_slice() {
            [c, q] if *c > 0.0 && *q > 0.0 => Ok(Theta::power(*c, *q)),
            _ => Err(cfg(format!("`{spec}` needs c, q > 0"))),
        },
        _ => Err(cfg(format!("Θ spec `{spec}` is not `power:c,q`"))),
    }
}

fn dimension(o: &Options) -> Res<u32> {
    let s = o.n.as_deref().unwrap_or("2");
    match s.trim().parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(cfg(format!("--n {s} must be a positive integer"))),
    }
}

fn ultra(o: &Options) -> Res<Outcome> {
    if o.theta.is_some() || o.nash.is_some() {
        let theta = match (&o.theta, &o.nash) {
            (Some(spec), _) => parse_theta(spec)?,
            (None, Some(spec)) => {
                let d: NashFunction = spec.parse().map_err(cfg)?;
                let d = match &o.g {
                    Some(g) => transfer_nash(&d, &parse_g(g)?).map_err(rt)?,
                    None => d,
                };
                Theta::from_nash(&d).map_err(cfg)?
            }
            _ => unreachable!(),
        };
        let s_min = o.s_min.unwrap_or(1.0);
        let mut t = Table::new("ultra", &["t", "a"]);
        t.meta("theta", theta.label());
        t.meta("s_min", s_min);
        match coulhon_bound(&theta, s_min) {
            Ok(ub) => {
                for row in ub.table(&grid(o.t_grid, "1e-3,1e3,13,log")).map_err(rt)? {
                    t.push(vec![row.t.into(), row.a.into()]);
                }
                t.meta("ultracontractive", true);
                t.meta("t_max", ub.t_max());
            }
            Err(Error::NotUltracontractive(reason)) => {
                eprintln!("not ultracontractive: {reason}");
                t.meta("ultracontractive", false);
                t.meta("reason", reason);
            }
            Err(e) => return Err(rt(e)),
        }
        return Ok(Outcome::clean(t));
    }
    let g = parse_g(need(&o.g, "g, --theta or --nash", "ultra")?)?;
    let n = dimension(o)?;
    if o.asymptotics.unwrap_or(false) {
        let c0 = o.c0.unwrap_or(1.0);
        let rep = asymptotics_report(&g, n as f64, c0).map_err(rt)?;
        let mut t = Table::new(
            "ultra",
            &["end", "r", "asymptote", "ln_beta_g", "ln_asymptote", "ratio"],
        );
        for (end, a) in [("0", &rep.limit_0), ("inf", &rep.limit_inf)] {
            t.push(vec![
                end.into(),
                a.r.into(),
                a.asymptote.clone().into(),
                a.ln_beta_g.into(),
                a.ln_asymptote.into(),
                a.ratio.into(),
            ]);
        }
        t.meta("g", g.name());
        t.meta("n", n);
        t.meta("c0", c0);
        return Ok(Outcome::clean(t));
    }
    let mut t = Table::new("ultra", &["t", "norm_sq", "norm", "finite"]);
    for tt in grid(o.t_grid, "0.05,2,40") {
        if !(tt > 0.0) {
            return Err(cfg(format!("t = {tt} must be positive")));
        }
        let v = norm_1_to_2_squared(&g, n, tt).map_err(rt)?;
        t.push(vec![tt.into(), v.into(), v.sqrt().into(), v.is_finite().into()]);
    }
    t.meta("g", g.name());
    t.meta("n", n);
    Ok(Outcome::clean(t))
}

fn profile(o: &Options) -> Res<Outcome> {
    let model = parse_model(need(&o.model, "model", "profile")?)?;
    let g = parse_g(o.g.as_deref().unwrap_or("identity"))?;
    let phi = Phi::bernstein(&g);
    let (starts, seed) = (o.samples.unwrap_or(8), o.seed.unwrap_or(0));
    let torus = matches!(model.kind(), ModelKind::Torus { .. });
    let mut t = Table::new("profile", &["r", "lower_bound", "fourier_rate", "argmax_hash"]);
    let mut bad = false;
    for r in grid(o.r_grid, "1e-4,1e1,11,log") {
        let est = estimate_profile(&model, &phi, r, starts, seed).map_err(rt)?;
        let upper = if torus {
            fourier_rate(&model, &|l| phi.eval(l), r).map_err(rt)?
        } else {
            f64::NAN
        };
        // The counting rate is a valid β, so it bounds the profile.
        bad |= upper.is_finite() && est.lower_bound > upper * (1.0 + 1e-9) + 1e-12;
        t.push(vec![
            r.into(),
            est.lower_bound.into(),
            upper.into(),
            hash_values(&est.argmax).into(),
        ]);
    }
    t.meta("model", model.label());
    t.meta("g", g.name());
    t.meta("starts", starts);
    t.meta("seed", Cell::Int(seed as i64));
    Ok(Outcome {
        table: t,
        violations: bad,
    })
}
