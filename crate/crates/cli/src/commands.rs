use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use soliton_core::filtrations::{dh_discrete, filtration_from_wt, level_from_germ_with_reference};
use soliton_core::germ::{
    a_wt_exact, delta_toric, dh_cdf_exact, ding_invariant, futaki, minimize_h, GermSpec,
};
use soliton_core::polyhedra::volume;
use soliton_core::rational::{int, to_f64, Rational, RationalVector};
use soliton_core::valuations::{
    h_local, lc_slope_monomial, lct_monomial, normalize_scaling, okounkov_body, vol_derivative,
    vol_fn_limit, weighted_vol, MonomialIdeal, MonomialValuation,
};

use crate::error::CliError;
use crate::io::{
    check_dim, fmt_csv, load_germ, num, nums, parse_float_list, parse_rational_list, q, qs,
    read_file, GermSpecFile, InputDigest, Record,
};

#[derive(Args, Debug)]
pub struct MinimizeArgs {
    /// Germ spec JSON.
    pub germ: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
}

pub fn minimize(args: &MinimizeArgs) -> Result<Record, CliError> {
    let bytes = read_file(&args.germ)?;
    let (file, spec) = load_germ(&bytes)?;
    let mut digest = InputDigest::new("minimize");
    digest
        .file(&bytes)
        .arg("tol", args.tol)
        .arg("seed", args.seed)
        .arg("max_iters", args.max_iters);
    let cert = minimize_h(&spec, args.tol, args.max_iters)?;
    let xi0 = cert.xi0.coords();
    let fut: Result<Vec<f64>, _> = (0..spec.dim())
        .map(|i| {
            let mut e = vec![0.0; spec.dim()];
            e[i] = 1.0;
            futaki(&spec, xi0, &e)
        })
        .collect();
    let mut rec = Record::new("minimize", digest);
    rec.output(
        "spec",
        serde_json::to_value(GermSpecFile::from_spec(&spec, file.cutoff)).expect("spec serializes"),
    )
    .output("xi0", nums(xi0))
    .output("h_value", num(cert.h_value))
    .output("weighted_volume", num(cert.h_value.exp()))
    .output("gradient_norm", num(cert.gradient_norm))
    .output("hessian_min_eig", num(cert.hessian_min_eig))
    .output("futaki_coordinate_directions", nums(&fut?))
    .diagnostic("tolerance", num(args.tol))
    .diagnostic("seed", json!(args.seed))
    .diagnostic("newton_iters", json!(cert.newton_iters))
    .diagnostic("gradient_steps", json!(cert.gradient_steps));
    Ok(rec)
}

#[derive(Args, Debug)]
pub struct HCurveArgs {
    /// Germ spec JSON.
    pub germ: PathBuf,
    /// Lattice direction, comma separated.
    #[arg(long)]
    pub direction: String,
    /// Base point; defaults to the soliton candidate.
    #[arg(long)]
    pub through: Option<String>,
    /// `lo,hi`
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    pub t_range: String,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

pub fn h_curve(args: &HCurveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bytes = read_file(&args.germ)?;
    let (_, spec) = load_germ(&bytes)?;
    let n = spec.dim();
    let eta: Vec<f64> = args
        .direction
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map(|k| k as f64)
                .map_err(|_| CliError::Spec(format!("direction entry '{x}' is not an integer")))
        })
        .collect::<Result<_, _>>()?;
    check_dim("direction", eta.len(), n)?;
    let base = match &args.through {
        Some(s) => parse_float_list(s)?,
        None => minimize_h(&spec, args.tol, 200)?.xi0.coords().to_vec(),
    };
    check_dim("base point", base.len(), n)?;
    let range = parse_float_list(&args.t_range)?;
    let [lo, hi] = range[..] else {
        return Err(CliError::Spec("t-range must be 'lo,hi'".into()));
    };
    if !(lo <= hi) || args.points < 2 {
        return Err(CliError::Spec(
            "need lo ≤ hi and at least two points".into(),
        ));
    }
    let at = |t: f64| -> Vec<f64> { base.iter().zip(&eta).map(|(b, e)| b + t * e).collect() };
    for t in [lo, hi] {
        if !spec.reeb().contains_interior(&at(t)) {
            return Err(CliError::Reeb(format!(
                "endpoint t = {t} gives {:?}, outside the open Reeb cone",
                at(t)
            )));
        }
    }
    let mut text = String::from("t,h\n");
    for i in 0..args.points {
        let t = lo + (hi - lo) * i as f64 / (args.points - 1) as f64;
        let h = soliton_core::germ::h_eval(&spec, &at(t))?;
        text.push_str(&format!("{},{}\n", fmt_csv(t), fmt_csv(h)));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Spec(format!("write: {e}")))
}

#[derive(Args, Debug)]
pub struct DhArgs {
    /// Germ spec JSON.
    pub germ: PathBuf,
    /// Weight vector of the valuation (rationals); defaults to the germ's
    /// reference vector.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Levels, comma separated.
    #[arg(long)]
    pub m: Option<String>,
    /// Also emit the limit CDF.
    #[arg(long)]
    pub limit: bool,
    /// Right end of the range (rational); required for unbounded germs
    /// unless the spec carries a cutoff.
    #[arg(long)]
    pub t_max: Option<String>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Write the atoms and convergence summary as JSON to this file.
    #[arg(long)]
    pub atoms: Option<PathBuf>,
}

/// Sup-norm distance between the step CDF of `atoms` and the exact limit CDF
/// on `(−∞, end]`.
fn cdf_gap(
    spec: &GermSpec,
    xi: &RationalVector,
    atoms: &[(Rational, Rational)],
    end: &Rational,
) -> Result<Rational, CliError> {
    let mut below = Rational::zero();
    let mut gap = Rational::zero();
    for (x, w) in atoms.iter().filter(|(x, _)| x <= end) {
        let limit = dh_cdf_exact(spec, xi, x)?;
        let above = &below + w;
        gap = gap
            .max((&below - &limit).abs())
            .max((&above - &limit).abs());
        below = above;
    }
    Ok(gap.max((&below - dh_cdf_exact(spec, xi, end)?).abs()))
}

pub fn dh(args: &DhArgs, out: &mut dyn Write) -> Result<Record, CliError> {
    let bytes = read_file(&args.germ)?;
    let (file, spec) = load_germ(&bytes)?;
    let xi = match &args.xi {
        Some(s) => parse_rational_list(s)?,
        None => spec.default_reference(),
    };
    check_dim("xi", xi.dim(), spec.dim())?;
    if !spec.reeb().contains_interior(&xi.to_f64()) {
        return Err(CliError::Reeb(format!(
            "ξ = {:?} is not in the open Reeb cone",
            xi.to_f64()
        )));
    }
    let ms: Vec<u64> = match &args.m {
        Some(s) => s
            .split(',')
            .map(|x| match x.trim().parse::<u64>() {
                Ok(m) if m > 0 => Ok(m),
                _ => Err(CliError::Spec(format!(
                    "level '{x}' is not a positive integer"
                ))),
            })
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    if ms.is_empty() && !args.limit {
        return Err(CliError::Spec(
            "nothing to do: pass --m and/or --limit".into(),
        ));
    }
    let a = a_wt_exact(&spec, &xi)?;
    let t_max = match (&args.t_max, file.cutoff) {
        (Some(s), _) => Some(parse_rational_list(s)?[0].clone()),
        (None, Some(c)) => Some(soliton_core::rational::from_f64(c)),
        (None, None) => None,
    };
    let end = match t_max {
        Some(t) if t.is_positive() => t,
        Some(_) => return Err(CliError::Spec("t-max must be positive".into())),
        None if spec.is_bounded() => {
            let top = spec
                .polyhedron()
                .vertices()
                .iter()
                .map(|p| p.dot(&xi))
                .max();
            top.expect("bounded germs have vertices") + &a
        }
        None => {
            return Err(CliError::Spec(
                "unbounded germ: pass --t-max or set a cutoff".into(),
            ))
        }
    };
    let mut digest = InputDigest::new("dh");
    digest
        .file(&bytes)
        .arg("xi", &xi)
        .arg("m", &ms)
        .arg("limit", args.limit)
        .arg("t_max", &end)
        .arg("points", args.points);

    // ξ = 0 puts every atom at 0; widen the range so the step is visible
    let lo = if xi.is_zero() {
        int(-1)
    } else {
        Rational::zero()
    };
    let hi = if xi.is_zero() {
        end.clone().max(int(1))
    } else {
        end.clone()
    };
    let steps = args.points.max(2) as i64 - 1;
    let grid: Vec<Rational> = (0..=steps)
        .map(|i| &lo + (&hi - &lo) * Rational::new(i.into(), steps.into()))
        .collect();
    let mut csv = String::from("series,t,cdf\n");
    let mut per_level = Vec::new();
    for &m in &ms {
        let cutoff = if spec.is_bounded() {
            None
        } else {
            Some(&end + int(1))
        };
        let level = Arc::new(level_from_germ_with_reference(
            &spec,
            m,
            cutoff,
            Some(xi.clone()),
        )?);
        let measure = dh_discrete(&filtration_from_wt(&spec, level.clone(), &xi)?);
        for t in &grid {
            csv.push_str(&format!(
                "m={m},{},{}\n",
                fmt_csv(to_f64(t)),
                fmt_csv(to_f64(&measure.cdf(t)))
            ));
        }
        // the sup-gap formula needs a continuous limit, which fails for ξ = 0
        let gap = if xi.is_zero() {
            Value::Null
        } else {
            num(to_f64(&cdf_gap(&spec, &xi, &measure.atoms, &end)?))
        };
        per_level.push(json!({
            "m": m,
            "dim": level.dim(),
            "sup_gap": gap,
            "atoms": measure.atoms.iter().map(|(x, w)| json!([q(x), q(w)])).collect::<Vec<_>>(),
        }));
    }
    if args.limit {
        for t in &grid {
            let c = dh_cdf_exact(&spec, &xi, t)?;
            csv.push_str(&format!(
                "limit,{},{}\n",
                fmt_csv(to_f64(t)),
                fmt_csv(to_f64(&c))
            ));
        }
    }
    out.write_all(csv.as_bytes())
        .map_err(|e| CliError::Spec(format!("write: {e}")))?;
    let gaps: Vec<String> = per_level
        .iter()
        .map(|l| format!("m={} gap={}", l["m"], l["sup_gap"]))
        .collect();
    eprintln!("dh: {}", gaps.join(", "));

    let mut rec = Record::new("dh", digest);
    rec.output("xi", qs(xi.as_slice()))
        .output("log_discrepancy", q(&a))
        .output("t_max", q(&end))
        .output("levels", Value::Array(per_level))
        .output("limit_total", q(&dh_cdf_exact(&spec, &xi, &end)?))
        .diagnostic("tolerance", json!("exact"));
    Ok(rec)
}

#[derive(Args, Debug)]
pub struct OkounkovArgs {
    /// Germ spec JSON.
    pub germ: PathBuf,
    /// Weights of the monomial valuation in the torus coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    /// Points at which to report `vol(v; t)` and its derivative.
    #[arg(long, default_value = "1")]
    pub t: String,
}

pub fn okounkov(args: &OkounkovArgs) -> Result<Record, CliError> {
    let bytes = read_file(&args.germ)?;
    let (_, spec) = load_germ(&bytes)?;
    let xi = parse_float_list(&args.xi)?;
    check_dim("xi", xi.len(), spec.dim())?;
    let ts = parse_float_list(&args.t)?;
    let mut digest = InputDigest::new("okounkov");
    digest.file(&bytes).arg("xi", &xi).arg("t", &ts);
    let v = MonomialValuation::on_germ(Arc::new(spec), &xi)?;
    let data = okounkov_body(&v);
    let body_volume = if data.body.is_bounded() {
        q(&volume(&data.body).map_err(|e| CliError::Spec(e.to_string()))?)
    } else {
        Value::Null
    };
    let vols = ts
        .iter()
        .map(|&t| {
            Ok(json!({
                "t": num(t),
                "vol": num(vol_fn_limit(&v, t)?),
                "derivative": num(vol_derivative(&v, t)?),
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rec = Record::new("okounkov", digest);
    rec.output(
        "body",
        json!({
            "vertices": data.body.vertices().iter().map(|p| qs(p.as_slice())).collect::<Vec<_>>(),
            "rays": data.body.rays().iter().map(|p| qs(p.as_slice())).collect::<Vec<_>>(),
            "halfspaces": data.body.halfspaces().iter()
                .map(|h| json!({"normal": qs(h.normal.as_slice()), "offset": q(&h.offset)}))
                .collect::<Vec<_>>(),
            "volume": body_volume,
        }),
    )
    .output(
        "concave_transform",
        json!({"slope": nums(&data.slope), "constant": num(data.constant)}),
    )
    .output("log_discrepancy", num(v.a_value()))
    .output("volume_function", Value::Array(vols))
    .diagnostic("tolerance", num(1e-12));
    Ok(rec)
}

#[derive(Args, Debug)]
pub struct SlopeArgs {
    /// Positive weights of a monomial valuation on affine space.
    #[arg(long)]
    pub weights: String,
    /// Rescale to the normalized representative first.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 64)]
    pub m_max: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Monomial ideal as exponent vectors, e.g. `2,0;0,3`; reports its lct.
    #[arg(long)]
    pub ideal: Option<String>,
}

pub fn slope(args: &SlopeArgs) -> Result<Record, CliError> {
    let w = parse_float_list(&args.weights)?;
    let mut digest = InputDigest::new("slope");
    digest
        .arg("weights", &w)
        .arg("normalize", args.normalize)
        .arg("m_max", args.m_max)
        .arg("tol", args.tol)
        .arg("ideal", &args.ideal);
    let mut v = MonomialValuation::affine(&w)?;
    let mut scale = 1.0;
    if args.normalize {
        let n = normalize_scaling(&v)?;
        scale = n.scale;
        v = n.valuation;
    }
    let mu = lc_slope_monomial(&v, args.m_max, args.tol)?;
    let local = h_local(&v, args.m_max, args.tol)?;
    let mut rec = Record::new("slope", digest);
    rec.output("weights", nums(v.weights()))
        .output("scale", num(scale))
        .output("log_discrepancy", num(v.a_value()))
        .output("slope", num(mu))
        .output("h", num(local.h))
        .output("s_tilde", num(local.s_tilde))
        .output("exp_h", num(local.h.exp()))
        .output("weighted_volume", num(weighted_vol(&v)?));
    if let Some(spec) = &args.ideal {
        let gens = spec
            .split(';')
            .map(|g| {
                g.split(',')
                    .map(|x| {
                        x.trim().parse::<i64>().map_err(|_| {
                            CliError::Spec(format!("exponent '{x}' is not an integer"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ideal = MonomialIdeal::new(w.len(), gens)?;
        rec.output("lct", q(&lct_monomial(&ideal)?));
    }
    rec.diagnostic("tolerance", num(args.tol))
        .diagnostic("m_max", json!(args.m_max));
    Ok(rec)
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    /// Germ spec JSON.
    pub germ: PathBuf,
    /// Reference vector; defaults to the soliton candidate.
    #[arg(long, allow_hyphen_values = true)]
    pub xi0: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

pub fn delta(args: &DeltaArgs) -> Result<Record, CliError> {
    let bytes = read_file(&args.germ)?;
    let (_, spec) = load_germ(&bytes)?;
    let mut digest = InputDigest::new("delta");
    digest
        .file(&bytes)
        .arg("xi0", &args.xi0)
        .arg("tol", args.tol);
    let xi0 = match &args.xi0 {
        Some(s) => parse_float_list(s)?,
        None => minimize_h(&spec, 1e-10, 200)?.xi0.coords().to_vec(),
    };
    check_dim("xi0", xi0.len(), spec.dim())?;
    let res = delta_toric(&spec, &xi0, args.tol)?;
    let ding = ding_invariant(&spec, &xi0, &res.argmin)?;
    let mut rec = Record::new("delta", digest);
    rec.output("xi0", nums(&xi0))
        .output("delta", num(res.value))
        .output("argmin", nums(&res.argmin))
        .output("ding_at_argmin", num(ding))
        .diagnostic("tolerance", num(args.tol))
        .diagnostic("starts", json!(res.starts));
    Ok(rec)
}
