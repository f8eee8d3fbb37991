use std::path::PathBuf;

use anyhow::{bail, Context};
use linpres::combinat::{is_nonredundant, s_of_n, singleton_bipartitions};
use linpres::equations::{
    all_splits, cross_check_secant, flattening, multilinear_rank, partition_rank_one_test, secant_degree_component,
    segre_degree2_component,
};
use linpres::interpolate::{interpolate_invariant, DEFAULT_CANDIDATE_CAP, DEFAULT_MARGIN, DEFAULT_ROW_CAP};
use linpres::poly::format_rational;
use linpres::stabilizer::{stabilize_single_invariant, stabilizer_report};
use linpres::tensor::{binomial, DEFAULT_MONOMIAL_CAP};
use linpres::{
    Bipartition, FactorMode, InterpolationConfig, LieBasis, LinearSubspace, PrimeSet, TensorFormat, Verdict, WeylMode,
};
use serde_json::{json, Value};

use crate::io::{emit, envelope, format_from, primes_from, read_point, read_polys, require_seed, span, usize_list, write_polys};
use crate::{BoundArgs, IdealArgs, InterpolateArgs, MembershipArgs, ReproArgs, StabilizerArgs, EXIT_LARGER, EXIT_OK, EXIT_VERIFY};

fn bound_json(dims: &[usize]) -> anyhow::Result<Value> {
    let rep = s_of_n(dims)?;
    let s = u64::try_from(rep.s).context("s(n) does not fit in 64 bits")?;
    let witness: Vec<String> = rep.witness.iter().map(|b| b.to_string()).collect();
    Ok(json!({
        "dims": dims,
        "s": s,
        "r_max": s - 1,
        "guaranteed_r_max": s - 1,
        "r_range": if s >= 2 { format!("1 <= r <= {}", s - 1) } else { "empty".to_string() },
        "witness_collection": witness,
    }))
}

pub fn bound(a: BoundArgs) -> anyhow::Result<u8> {
    let dims = usize_list(a.dims.as_deref().context("--dims is required")?, "dimension")?;
    emit(&envelope("bound", bound_json(&dims)?), &a.json)?;
    Ok(EXIT_OK)
}

/// The degree `r+1` component used throughout: quadrics of the Segre-Veronese
/// variety for `r = 1`, otherwise `(r+1)`-minors of all flattenings.
fn secant_component(format: &TensorFormat, r: usize) -> anyhow::Result<LinearSubspace> {
    match r {
        0 => bail!("--secant must be at least 1"),
        1 => Ok(segre_degree2_component(format)?),
        _ => Ok(secant_degree_component(format, r)?),
    }
}

/// Number of minors spanning the component, before elimination.
fn generator_count(format: &TensorFormat, r: usize) -> anyhow::Result<u128> {
    let mut total = 0u128;
    let splits = if r == 1 {
        all_splits(format)
    } else {
        let k = format.num_factors();
        linpres::combinat::all_bipartitions(k)?
            .into_iter()
            .map(|b| (0..k).map(|i| usize::from(b.contains(i))).collect())
            .collect()
    };
    for rows in splits {
        let m = flattening(format, &rows)?;
        total += binomial(m.rows() as u128, r as u128 + 1) * binomial(m.cols() as u128, r as u128 + 1);
    }
    Ok(total)
}

pub fn ideal(a: IdealArgs) -> anyhow::Result<u8> {
    let format = format_from(&a.format, &a.degrees)?;
    let r = a.secant.context("--secant is required")?;
    let degree = a.degree.unwrap_or(r + 1);
    if degree != r + 1 {
        return Err(linpres::Error::Unsupported(format!("only the degree {} component of σ_{r} is computed", r + 1)).into());
    }
    let cap = a.monomial_cap.map_or(DEFAULT_MONOMIAL_CAP, u128::from);
    let comp = secant_component(&format, r)?;
    let cross = if a.cross_check {
        Some(serde_json::to_value(cross_check_secant(&format, r, &comp, cap)?)?)
    } else {
        None
    };
    if let Some(out) = &a.output {
        write_polys(out, &format, comp.basis())?;
    }
    let body = json!({
        "format": format,
        "secant": r,
        "degree": degree,
        "dim": comp.dim(),
        "generator_count": u64::try_from(generator_count(&format, r)?).unwrap_or(u64::MAX),
        "basis_file": a.output,
        "cross_check": cross,
    });
    emit(&envelope("ideal", body), &a.json)?;
    Ok(EXIT_OK)
}

fn basis_json(lb: &LieBasis, format: &TensorFormat) -> Value {
    let matrices: Vec<Value> = lb
        .basis
        .iter()
        .map(|m| {
            let entries: Vec<Value> = m.entries().map(|(r, c, x)| json!([r, c, format_rational(x)])).collect();
            Value::Array(entries)
        })
        .collect();
    let coords: Vec<String> = (0..lb.n).map(|i| format.coord_label(i)).collect();
    envelope(
        "stabilizer_basis",
        json!({ "format": format, "n": lb.n, "dim": lb.dim(), "coordinates": coords, "basis": matrices }),
    )
}

pub fn stabilizer(a: StabilizerArgs) -> anyhow::Result<u8> {
    let seed = require_seed(a.seed)?;
    let primes = primes_from(&a.primes, seed)?;
    let merged = a.merged.iter().map(|m| usize_list(m, "merged dimension")).collect::<anyhow::Result<Vec<_>>>()?;
    let (format, comp, construction) = match (&a.invariant, a.secant) {
        (Some(_), Some(_)) => bail!("give either --invariant or --secant"),
        (Some(path), None) => {
            let given = if a.format.is_some() { Some(format_from(&a.format, &a.degrees)?) } else { None };
            let (format, polys) = read_polys(path, given)?;
            let comp = span(&polys)?;
            (format, comp, format!("forms from {}", path.display()))
        }
        (None, Some(r)) => {
            let format = format_from(&a.format, &a.degrees)?;
            let comp = secant_component(&format, r)?;
            (format, comp, format!("σ_{r} minors"))
        }
        (None, None) => bail!("--secant or --invariant is required"),
    };
    let (report, lb) = stabilizer_report(&comp, &format, &construction, &merged, &primes)?;
    if let Some(path) = &a.emit_basis {
        std::fs::write(path, serde_json::to_string_pretty(&basis_json(&lb, &format))? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let mut body = serde_json::to_value(&report)?;
    body["seed"] = json!(seed);
    body["basis_file"] = json!(a.emit_basis);
    emit(&envelope("stabilizer", body), &a.json)?;
    Ok(match report.verdict {
        Verdict::Expected => EXIT_OK,
        Verdict::LargerThanExpected if a.allow_larger => EXIT_OK,
        _ => EXIT_LARGER,
    })
}

pub fn membership(a: MembershipArgs) -> anyhow::Result<u8> {
    let format = format_from(&a.format, &a.degrees)?;
    if a.point.is_none() && a.ranks.is_none() {
        bail!("--point or --ranks is required");
    }
    let mut body = json!({ "format": format });
    if let Some(path) = &a.point {
        let point = read_point(path, &format)?;
        let ranks = multilinear_rank(&point, &format)?;
        body["multilinear_rank"] = json!(ranks);
        body["rank_one"] = json!(ranks.iter().all(|&r| r == 1));
        if format.is_multilinear() && format.num_factors() >= 2 {
            let singles = singleton_bipartitions(format.num_factors())?;
            body["slice_rank_one"] = json!(partition_rank_one_test(&point, &format, &singles)?);
        }
        if let Some(c) = &a.collection {
            let coll = c
                .split(';')
                .map(|b| Bipartition::parse(b.trim(), format.num_factors()))
                .collect::<linpres::Result<Vec<_>>>()?;
            body["collection"] = json!(coll);
            body["partition_rank_one"] = json!(partition_rank_one_test(&point, &format, &coll)?);
        }
    }
    if let Some(r) = &a.ranks {
        let ranks = usize_list(r, "rank")?;
        body["ranks"] = json!(ranks);
        body["nonredundant"] = json!(is_nonredundant(format.dims(), format.degrees(), &ranks)?);
    }
    emit(&envelope("membership", body), &a.json)?;
    Ok(EXIT_OK)
}

fn interpolation_config(a: &InterpolateArgs) -> anyhow::Result<InterpolationConfig> {
    let r = a.secant.context("--secant is required")?;
    let degree = a.degree.context("--degree is required")?;
    let mut cfg = InterpolationConfig::new(r, degree, require_seed(a.seed)?);
    cfg.options.weyl = match (a.weyl, a.signed_weyl) {
        (_, true) => WeylMode::Signed,
        (true, false) => WeylMode::Plain,
        _ => WeylMode::Off,
    };
    cfg.options.factor = match (a.skew, a.symmetric) {
        (true, true) => bail!("--skew and --symmetric exclude each other"),
        (true, false) => FactorMode::Skew,
        (false, true) => FactorMode::Symmetric,
        _ => FactorMode::Off,
    };
    cfg.options.candidate_cap = a.candidate_cap.unwrap_or(DEFAULT_CANDIDATE_CAP);
    cfg.margin = a.margin.unwrap_or(DEFAULT_MARGIN);
    cfg.row_cap = a.row_cap.unwrap_or(DEFAULT_ROW_CAP);
    if cfg.options.candidate_cap == 0 || cfg.row_cap == 0 {
        bail!("caps must be positive");
    }
    Ok(cfg)
}

/// Cache file stem for an interpolation; readable rather than hashed.
fn cache_stem(format: &TensorFormat, cfg: &InterpolationConfig, primes: &PrimeSet) -> String {
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-");
    let primes: Vec<String> = primes.primes().iter().map(|p| p.to_string()).collect();
    format!(
        "interp_n{}_d{}_r{}_deg{}_{}_{:?}_m{}_s{}_p{}",
        list(format.dims()),
        list(format.degrees()),
        cfg.r,
        cfg.degree,
        cfg.options.construction(),
        cfg.options.weyl,
        cfg.margin,
        cfg.seed,
        primes.join("-")
    )
    .to_lowercase()
}

pub fn interpolate(a: InterpolateArgs) -> anyhow::Result<u8> {
    let format = format_from(&a.format, &a.degrees)?;
    let cfg = interpolation_config(&a)?;
    let primes = primes_from(&a.primes, cfg.seed)?;
    let output = a.output.clone().unwrap_or_else(|| PathBuf::from("invariant.poly"));
    let cache = std::env::var_os("LINPRES_CACHE_DIR").map(PathBuf::from);
    let stem = cache_stem(&format, &cfg, &primes);

    if let Some(dir) = &cache {
        let (poly, meta) = (dir.join(format!("{stem}.poly")), dir.join(format!("{stem}.json")));
        if poly.exists() && meta.exists() {
            std::fs::copy(&poly, &output).with_context(|| format!("writing {}", output.display()))?;
            let mut body: Value = serde_json::from_str(&std::fs::read_to_string(&meta)?)?;
            body["invariant_file"] = json!(output);
            body["cache"] = json!("hit");
            emit(&envelope("interpolate", body), &a.json)?;
            return Ok(EXIT_OK);
        }
    }

    let res = interpolate_invariant(&format, &cfg, &primes)?;
    write_polys(&output, &format, [&res.invariant])?;
    let mut body = serde_json::to_value(&res)?;
    body["options"] = serde_json::to_value(cfg.options)?;
    body["margin"] = json!(cfg.margin);
    body["row_cap"] = json!(cfg.row_cap);
    if let Some(dir) = &cache {
        std::fs::create_dir_all(dir)?;
        write_polys(&dir.join(format!("{stem}.poly")), &format, [&res.invariant])?;
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&body)?)?;
    }
    body["invariant_file"] = json!(output);
    body["cache"] = json!(if cache.is_some() { "miss" } else { "off" });
    emit(&envelope("interpolate", body), &a.json)?;
    Ok(EXIT_OK)
}

struct Case {
    name: String,
    expected: Value,
    actual: Value,
}

fn multilinear(dims: &[usize]) -> TensorFormat {
    TensorFormat::multilinear(dims.to_vec()).expect("valid reference format")
}

fn stabilizer_case(name: &str, dims: &[usize], r: usize, want: usize, verdict: Verdict, merged: Option<Vec<usize>>) -> anyhow::Result<Case> {
    let format = multilinear(dims);
    let comp = secant_component(&format, r)?;
    let (rep, _) = stabilizer_report(&comp, &format, "minors", &[], &PrimeSet::auto(7))?;
    Ok(Case {
        name: name.into(),
        expected: json!({ "dim": want, "verdict": verdict, "merged_match": merged }),
        actual: json!({ "dim": rep.dim_actual, "verdict": rep.verdict, "merged_match": rep.merged_match }),
    })
}

fn interpolation_case(
    name: &str,
    format: TensorFormat,
    cfg: InterpolationConfig,
    want_stab: usize,
    out_dir: &Option<PathBuf>,
) -> anyhow::Result<Case> {
    let res = interpolate_invariant(&format, &cfg, &PrimeSet::auto(cfg.seed))?;
    if let Some(dir) = out_dir {
        write_polys(&dir.join(format!("{name}.poly")), &format, [&res.invariant])?;
    }
    let (rep, _) = stabilize_single_invariant(&res.invariant, &format, &PrimeSet::auto(cfg.seed))?;
    Ok(Case {
        name: name.into(),
        expected: json!({ "kernel_dim": 1, "verified": true, "stabilizer_dim": want_stab }),
        actual: json!({
            "kernel_dim": res.kernel_dim,
            "verified": res.verification.all_passed(),
            "stabilizer_dim": rep.dim_actual,
            "terms": res.terms,
        }),
    })
}

fn matches(expected: &Value, actual: &Value) -> bool {
    expected.as_object().is_some_and(|e| e.iter().all(|(k, v)| actual.get(k) == Some(v)))
}

pub fn repro(a: ReproArgs) -> anyhow::Result<u8> {
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut cases = Vec::new();
    for (dims, s) in [(vec![2, 2, 2], 2u64), (vec![2, 2, 2, 2], 4), (vec![2, 3, 4], 3), (vec![3, 3, 3, 3], 9)] {
        let got = bound_json(&dims)?;
        cases.push(Case {
            name: format!("bound {dims:?}"),
            expected: json!({ "s": s, "r_max": s - 1 }),
            actual: got,
        });
    }
    let e = Verdict::Expected;
    cases.push(stabilizer_case("det2", &[2, 2], 1, 7, e, None)?);
    cases.push(stabilizer_case("Segre (P1)^3 quadrics", &[2, 2, 2], 1, 10, e, None)?);
    cases.push(stabilizer_case("sigma_2 (P1)^4", &[2, 2, 2, 2], 2, 13, e, None)?);
    cases.push(stabilizer_case("sigma_2 (P1)^3 x P2", &[2, 2, 2, 3], 2, 18, e, None)?);
    cases.push(stabilizer_case("sigma_2 (P1)^2 x (P2)^2", &[2, 2, 3, 3], 2, 23, e, None)?);
    cases.push(stabilizer_case("sigma_3 (P1)^4", &[2, 2, 2, 2], 3, 13, e, None)?);
    cases.push(stabilizer_case("sigma_2 (P1)^5", &[2, 2, 2, 2, 2], 2, 16, e, None)?);
    cases.push(stabilizer_case(
        "sigma_2 P1 x P1 x P4",
        &[2, 2, 5],
        2,
        40,
        Verdict::LargerThanExpected,
        Some(vec![4, 5]),
    )?);
    cases.push(interpolation_case("det3", multilinear(&[3, 3]), InterpolationConfig::new(2, 3, 11), 17, &a.out_dir)?);
    let cubic = TensorFormat::new(vec![3], vec![3])?;
    cases.push(interpolation_case("aronhold", cubic, InterpolationConfig::new(3, 4, 5), 9, &a.out_dir)?);
    if a.stretch {
        for (name, dims, r, degree, want) in [("strassen", vec![3, 3, 3], 4, 9, 25), ("oeding_sam", vec![2; 5], 5, 6, 16)] {
            let mut cfg = InterpolationConfig::new(r, degree, 17);
            cfg.options.weyl = WeylMode::Signed;
            cfg.options.factor = FactorMode::Skew;
            cases.push(interpolation_case(name, multilinear(&dims), cfg, want, &a.out_dir)?);
        }
    }
    let failed = cases.iter().filter(|c| !matches(&c.expected, &c.actual)).count();
    let rows: Vec<Value> = cases
        .iter()
        .map(|c| json!({ "name": c.name, "expected": c.expected, "actual": c.actual, "pass": matches(&c.expected, &c.actual) }))
        .collect();
    let body = json!({ "cases": rows, "passed": cases.len() - failed, "failed": failed, "stretch": a.stretch });
    emit(&envelope("repro", body), &a.json)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}
