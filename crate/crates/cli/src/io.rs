use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use linpres::poly::parse_rational;
use linpres::{LinearSubspace, Poly, PrimeSet, Rational, TensorFormat};
use serde_json::{json, Value};

pub fn usize_list(s: &str, what: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad {what} entry `{x}`")))
        .collect()
}

/// `--format 2,2,2` with optional `--degrees`, or the literal `dims=.. degrees=..`.
pub fn format_from(format: &Option<String>, degrees: &Option<String>) -> anyhow::Result<TensorFormat> {
    let Some(f) = format else {
        bail!("--format is required");
    };
    if f.contains('=') {
        if degrees.is_some() {
            bail!("give degrees either inside --format or with --degrees, not both");
        }
        return Ok(TensorFormat::parse(f)?);
    }
    let dims = usize_list(f, "dimension")?;
    let degrees = match degrees {
        Some(d) => usize_list(d, "degree")?,
        None => vec![1; dims.len()],
    };
    Ok(TensorFormat::new(dims, degrees)?)
}

pub fn primes_from(primes: &Option<String>, seed: u64) -> anyhow::Result<PrimeSet> {
    Ok(PrimeSet::parse(primes.as_deref().unwrap_or("auto"), seed)?)
}

pub fn require_seed(seed: Option<u64>) -> anyhow::Result<u64> {
    seed.context("--seed is required for randomized commands")
}

/// Attaches the schema version and command name.
pub fn envelope(command: &str, body: Value) -> Value {
    let mut out = json!({ "schema": 1, "command": command });
    if let (Some(o), Value::Object(b)) = (out.as_object_mut(), body) {
        o.extend(b);
    }
    out
}

pub fn emit(value: &Value, path: &Option<PathBuf>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

const FORMAT_HEADER: &str = "# format ";

/// One polynomial per line after a `# format` header.
pub fn write_polys<'a>(path: &Path, format: &TensorFormat, polys: impl IntoIterator<Item = &'a Poly>) -> anyhow::Result<()> {
    let mut text = format!("{FORMAT_HEADER}{format}\n");
    for p in polys {
        text.push_str(&p.display(format).to_string());
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Reads a polynomial file. The format comes from `format` or from the header.
pub fn read_polys(path: &Path, format: Option<TensorFormat>) -> anyhow::Result<(TensorFormat, Vec<Poly>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text
        .lines()
        .find_map(|l| l.strip_prefix(FORMAT_HEADER))
        .map(TensorFormat::parse)
        .transpose()?;
    let format = match (format, header) {
        (Some(f), Some(h)) if f != h => bail!("{} declares {h}, but {f} was requested", path.display()),
        (Some(f), _) | (None, Some(f)) => f,
        (None, None) => bail!("{} has no `# format` header; pass --format", path.display()),
    };
    let polys = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| Poly::parse(l, &format, 0))
        .collect::<linpres::Result<Vec<_>>>()?;
    if polys.is_empty() {
        bail!("{} contains no polynomials", path.display());
    }
    Ok((format, polys))
}

pub fn span(polys: &[Poly]) -> anyhow::Result<LinearSubspace> {
    let d = polys[0].degree();
    if let Some(p) = polys.iter().find(|p| p.degree() != d) {
        bail!("forms of degrees {d} and {} cannot span one component", p.degree());
    }
    Ok(linpres::poly::echelonize(polys, d)?)
}

pub fn read_point(path: &Path, format: &TensorFormat) -> anyhow::Result<Vec<Rational>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let point = text
        .lines()
        .map(|l| l.split('#').next().unwrap())
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(parse_rational)
        .collect::<linpres::Result<Vec<_>>>()?;
    if point.len() != format.ambient_dimension() {
        bail!("point has {} coordinates, format {format} needs {}", point.len(), format.ambient_dimension());
    }
    Ok(point)
}
