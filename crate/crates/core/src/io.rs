//! CSV formats for points, values, coefficients and reports.
//!
//! Every file starts with a `# kilab-<kind> v1 ...` line, followed by
//! `#`-prefixed provenance lines. Numbers are written with 17 significant
//! digits so that written-then-read values are bitwise identical.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::diagnostics::{ConvergenceStudy, DecayFit, LebesgueReport};
use crate::error::{KilabError, Result};
use crate::geometry::{ManifoldDescriptor, ManifoldKind, Point};
use crate::interpolation::Interpolant;
use crate::pointsets::PointSet;

pub const POINTS_MAGIC: &str = "# kilab-points v1";
pub const VALUES_MAGIC: &str = "# kilab-values v1";
pub const COEFFS_MAGIC: &str = "# kilab-coeffs v1";
pub const LEBESGUE_MAGIC: &str = "# kilab-lebesgue v1";
pub const DECAY_MAGIC: &str = "# kilab-decay v1";
pub const CONVERGE_MAGIC: &str = "# kilab-converge v1";

/// Full-precision decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Run metadata echoed into every output file.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Provenance {
    pub version: String,
    pub command: String,
    /// Effective configuration, in key order.
    pub config: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(command: &str, config: Vec<(String, String)>, seed: Option<u64>) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed,
        }
    }

    pub fn write_lines(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "# generator: kilab {} {}", self.version, self.command)?;
        for (k, v) in &self.config {
            writeln!(w, "# config: {k}={v}")?;
        }
        match self.seed {
            Some(s) => writeln!(w, "# seed: {s}")?,
            None => writeln!(w, "# seed: none")?,
        }
        Ok(())
    }
}

fn points_header(man: &ManifoldDescriptor) -> String {
    match man.kind() {
        ManifoldKind::UnitSphere2 => format!("{POINTS_MAGIC} kind=sphere"),
        ManifoldKind::FlatBox => format!("{POINTS_MAGIC} kind=box d={}", man.dimension()),
    }
}

fn write_row(w: &mut dyn Write, values: impl IntoIterator<Item = f64>) -> Result<()> {
    let row: Vec<String> = values.into_iter().map(fmt_f64).collect();
    writeln!(w, "{}", row.join(","))?;
    Ok(())
}

fn coord_names(man: &ManifoldDescriptor) -> Vec<String> {
    match man.kind() {
        ManifoldKind::UnitSphere2 => vec!["x".into(), "y".into(), "z".into()],
        ManifoldKind::FlatBox => (1..=man.dimension()).map(|i| format!("x{i}")).collect(),
    }
}

pub fn write_points(w: &mut dyn Write, xi: &PointSet, prov: &Provenance) -> Result<()> {
    writeln!(w, "{}", points_header(xi.manifold()))?;
    prov.write_lines(w)?;
    writeln!(w, "# label: {}", xi.label())?;
    for p in xi.nodes() {
        write_row(w, p.coords().iter().copied())?;
    }
    Ok(())
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn data_lines(r: impl BufRead) -> Result<(Option<String>, Vec<(usize, String)>)> {
    let mut first = None;
    let mut data = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if i == 0 && trimmed.starts_with('#') {
            first = Some(trimmed.to_string());
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        data.push((i + 1, trimmed.to_string()));
    }
    Ok((first, data))
}

fn parse_row(line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| KilabError::Parse {
                line: line_no,
                msg: format!("bad number '{}'", f.trim()),
            })
        })
        .collect()
}

fn is_column_names(line: &str) -> bool {
    line.split(',').all(|f| f.trim().parse::<f64>().is_err())
}

/// Reads a points file. Box files use `bounds` when given, otherwise the
/// unit box of the declared dimension.
pub fn read_points(r: impl BufRead, bounds: Option<Vec<(f64, f64)>>, label: &str) -> Result<PointSet> {
    let (first, data) = data_lines(r)?;
    let header = first.ok_or_else(|| KilabError::Parse {
        line: 1,
        msg: format!("missing '{POINTS_MAGIC}' header"),
    })?;
    let rest = header.strip_prefix(POINTS_MAGIC).ok_or_else(|| KilabError::Parse {
        line: 1,
        msg: format!("expected '{POINTS_MAGIC}', got '{header}'"),
    })?;
    let fields: Vec<&str> = rest.split_whitespace().collect();
    let man = match fields.as_slice() {
        ["kind=sphere"] => ManifoldDescriptor::sphere(),
        ["kind=box", d] => {
            let d: usize = d
                .strip_prefix("d=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| KilabError::Parse {
                    line: 1,
                    msg: format!("bad box dimension '{d}'"),
                })?;
            match bounds {
                Some(b) if b.len() == d => ManifoldDescriptor::flat_box(b)?,
                Some(b) => {
                    return Err(KilabError::Dimension {
                        expected: d,
                        got: b.len(),
                    })
                }
                None => ManifoldDescriptor::unit_box(d)?,
            }
        }
        _ => {
            return Err(KilabError::Parse {
                line: 1,
                msg: format!("unknown points header '{header}'"),
            })
        }
    };
    let dim = man.ambient_dimension();
    let mut nodes = Vec::with_capacity(data.len());
    for (k, (line_no, line)) in data.iter().enumerate() {
        if k == 0 && is_column_names(line) {
            continue;
        }
        let coords = parse_row(*line_no, line)?;
        if coords.len() != dim {
            return Err(KilabError::Parse {
                line: *line_no,
                msg: format!("expected {dim} coordinates, got {}", coords.len()),
            });
        }
        let p = Point(coords);
        if !man.contains(&p) {
            return Err(KilabError::Parse {
                line: *line_no,
                msg: format!("point {:?} is not on the manifold", p.coords()),
            });
        }
        nodes.push(p);
    }
    if nodes.is_empty() {
        return Err(KilabError::Parse {
            line: 1,
            msg: "points file has no rows".into(),
        });
    }
    PointSet::new(nodes, man, label)
}

pub fn write_values(w: &mut dyn Write, values: &[f64], prov: &Provenance) -> Result<()> {
    writeln!(w, "{VALUES_MAGIC}")?;
    prov.write_lines(w)?;
    writeln!(w, "value")?;
    for &v in values {
        writeln!(w, "{}", fmt_f64(v))?;
    }
    Ok(())
}

/// One value per row; the header line and a `value` column name are optional.
pub fn read_values(r: impl BufRead) -> Result<Vec<f64>> {
    let (_, data) = data_lines(r)?;
    let mut out = Vec::with_capacity(data.len());
    for (k, (line_no, line)) in data.iter().enumerate() {
        if k == 0 && is_column_names(line) {
            continue;
        }
        let row = parse_row(*line_no, line)?;
        if row.len() != 1 {
            return Err(KilabError::Parse {
                line: *line_no,
                msg: format!("expected one value, got {}", row.len()),
            });
        }
        out.push(row[0]);
    }
    Ok(out)
}

/// Interpolant coefficients: rows `kernel,j,a_j` then `poly,k,b_k`.
pub fn write_coeffs(w: &mut dyn Write, s: &Interpolant, prov: &Provenance) -> Result<()> {
    writeln!(w, "{COEFFS_MAGIC} kernel={}", s.kernel().spec())?;
    prov.write_lines(w)?;
    writeln!(w, "block,index,coeff")?;
    for (j, a) in s.kernel_coeffs().iter().enumerate() {
        writeln!(w, "kernel,{j},{}", fmt_f64(*a))?;
    }
    for (k, b) in s.poly_coeffs().iter().enumerate() {
        writeln!(w, "poly,{k},{}", fmt_f64(*b))?;
    }
    Ok(())
}

/// Parsed coefficients file.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffsFile {
    pub kernel: String,
    pub kernel_coeffs: Vec<f64>,
    pub poly_coeffs: Vec<f64>,
}

pub fn read_coeffs(r: impl BufRead) -> Result<CoeffsFile> {
    let (first, data) = data_lines(r)?;
    let header = first.unwrap_or_default();
    let kernel = header
        .strip_prefix(COEFFS_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("kernel="))
        .ok_or_else(|| KilabError::Parse {
            line: 1,
            msg: format!("expected '{COEFFS_MAGIC} kernel=<spec>'"),
        })?
        .to_string();
    let (mut kernel_coeffs, mut poly_coeffs) = (Vec::new(), Vec::new());
    for (k, (line_no, line)) in data.iter().enumerate() {
        if k == 0 && line == "block,index,coeff" {
            continue;
        }
        let bad = |msg: String| KilabError::Parse { line: *line_no, msg };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", f.len())));
        }
        let index: usize = f[1].parse().map_err(|_| bad(format!("bad index '{}'", f[1])))?;
        let value: f64 = f[2].parse().map_err(|_| bad(format!("bad number '{}'", f[2])))?;
        let target = match f[0] {
            "kernel" => &mut kernel_coeffs,
            "poly" => &mut poly_coeffs,
            other => return Err(bad(format!("unknown block '{other}'"))),
        };
        if index != target.len() {
            return Err(bad(format!("index {index} out of order")));
        }
        target.push(value);
    }
    Ok(CoeffsFile {
        kernel,
        kernel_coeffs,
        poly_coeffs,
    })
}

pub fn write_lebesgue(
    w: &mut dyn Write,
    man: &ManifoldDescriptor,
    grid: &[Point],
    report: &LebesgueReport,
    prov: &Provenance,
) -> Result<()> {
    writeln!(w, "{LEBESGUE_MAGIC} kernel={}", report.kernel)?;
    prov.write_lines(w)?;
    let mut names = coord_names(man);
    names.push("lambda".into());
    writeln!(w, "{}", names.join(","))?;
    for (p, l) in grid.iter().zip(&report.lambda_samples) {
        write_row(w, p.coords().iter().copied().chain([*l]))?;
    }
    writeln!(
        w,
        "# L_est={} n_nodes={} grid_size={} h={} q={} rho={}",
        fmt_f64(report.l_est),
        report.n_nodes,
        report.grid_size,
        fmt_f64(report.mesh.mesh_norm_h),
        fmt_f64(report.mesh.separation_q),
        fmt_f64(report.mesh.mesh_ratio_rho)
    )?;
    Ok(())
}

pub fn write_decay(w: &mut dyn Write, fit: &DecayFit, prov: &Provenance) -> Result<()> {
    writeln!(w, "{DECAY_MAGIC}")?;
    prov.write_lines(w)?;
    writeln!(w, "s,max_abs_chi")?;
    for &(s, m) in &fit.bins {
        write_row(w, [s, m])?;
    }
    writeln!(
        w,
        "# nu={} r2={} intercept={} fit_range={},{}",
        fmt_f64(fit.nu_fit),
        fmt_f64(fit.r_squared),
        fmt_f64(fit.intercept),
        fmt_f64(fit.fit_range.0),
        fmt_f64(fit.fit_range.1)
    )?;
    Ok(())
}

pub fn write_converge(w: &mut dyn Write, study: &ConvergenceStudy, prov: &Provenance) -> Result<()> {
    writeln!(w, "{CONVERGE_MAGIC} kernel={} target={}", study.kernel, study.target)?;
    prov.write_lines(w)?;
    writeln!(w, "n,h,sup_err,rate")?;
    for r in &study.rows {
        writeln!(w, "{},{},{},{}", r.n, fmt_f64(r.h), fmt_f64(r.sup_err), fmt_f64(r.rate_local))?;
    }
    writeln!(w, "# rate={}", fmt_f64(study.rate))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::{fibonacci_sphere, halton_box, random_sphere};
    use proptest::prelude::*;

    fn prov() -> Provenance {
        Provenance::new("gen", vec![("n".into(), "5".into())], Some(3))
    }

    fn roundtrip(xi: &PointSet, bounds: Option<Vec<(f64, f64)>>) -> PointSet {
        let mut buf = Vec::new();
        write_points(&mut buf, xi, &prov()).unwrap();
        read_points(buf.as_slice(), bounds, "read").unwrap()
    }

    #[test]
    fn sphere_points_roundtrip_bitwise() {
        let xi = random_sphere(200, 11).unwrap();
        let back = roundtrip(&xi, None);
        assert_eq!(back.nodes(), xi.nodes());
        assert_eq!(back.manifold(), xi.manifold());
    }

    #[test]
    fn box_points_roundtrip_with_bounds() {
        let b = ManifoldDescriptor::flat_box(vec![(-1.0, 2.0), (0.0, 0.5), (3.0, 4.0)]).unwrap();
        let xi = halton_box(50, &b).unwrap();
        let back = roundtrip(&xi, Some(b.box_bounds().to_vec()));
        assert_eq!(back.nodes(), xi.nodes());
        let mut buf = Vec::new();
        write_points(&mut buf, &xi, &prov()).unwrap();
        // outside the unit box
        assert!(read_points(buf.as_slice(), None, "x").is_err());
    }

    #[test]
    fn header_format() {
        let mut buf = Vec::new();
        write_points(&mut buf, &fibonacci_sphere(1).unwrap(), &prov()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# kilab-points v1 kind=sphere\n"));
        assert!(text.contains("# seed: 3"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
        let b = ManifoldDescriptor::unit_box(2).unwrap();
        let mut buf = Vec::new();
        write_points(&mut buf, &halton_box(3, &b).unwrap(), &prov()).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("# kilab-points v1 kind=box d=2\n"));
    }

    #[test]
    fn malformed_points_are_parse_errors() {
        let cases = [
            "x,y,z\n1,0,0\n",
            "# kilab-points v1 kind=torus\n1,0,0\n",
            "# kilab-points v1 kind=sphere\n1,0\n",
            "# kilab-points v1 kind=sphere\n1,0,abc\n",
            "# kilab-points v1 kind=sphere\n2,0,0\n",
            "# kilab-points v1 kind=sphere\n",
        ];
        for c in cases {
            assert!(matches!(read_points(c.as_bytes(), None, "x"), Err(KilabError::Parse { .. })), "{c}");
        }
        let dup = "# kilab-points v1 kind=sphere\n1,0,0\n1,0,0\n";
        assert!(matches!(read_points(dup.as_bytes(), None, "x"), Err(KilabError::Degenerate(_))));
    }

    #[test]
    fn values_roundtrip() {
        let v = vec![0.1, -3.5e-300, std::f64::consts::PI, 1.0 / 3.0];
        let mut buf = Vec::new();
        write_values(&mut buf, &v, &prov()).unwrap();
        assert_eq!(read_values(buf.as_slice()).unwrap(), v);
        assert_eq!(read_values("1\n2.5\n".as_bytes()).unwrap(), vec![1.0, 2.5]);
        assert!(read_values("1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn float_formatting_roundtrips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
