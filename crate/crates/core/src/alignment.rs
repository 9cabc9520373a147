//! Linear maps between embedding spaces fitted on seed dictionary pairs:
//! ridge least squares, orthogonal Procrustes and CCA.
//!
//! A source row vector `x` maps into target coordinates as
//! `(x - source_mean) · W + target_mean`; the means are zero unless the
//! method centers (CCA always, the other two only on request).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dictionary::SeedDictionary;
use crate::embedding::{read_utf8, write_text, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cca,
    LeastSquares,
    Procrustes,
}

str_enum!(Method { Cca => "cca", LeastSquares => "least_squares", Procrustes => "procrustes" });

/// Seed vectors of the in-vocabulary dictionary pairs, row-aligned.
#[derive(Clone, Debug)]
pub struct PairedMatrix {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub kept_pairs: Vec<(String, String)>,
    pub skipped: usize,
}

impl PairedMatrix {
    /// Builds directly from matrices; row `i` of `x` pairs with row `i` of `y`.
    pub fn from_matrices(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() || x.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "paired matrices need equal non-zero row counts, got {} and {}",
                x.nrows(),
                y.nrows()
            )));
        }
        let kept_pairs = (0..x.nrows()).map(|i| (format!("x{i}"), format!("y{i}"))).collect();
        Ok(Self {
            x,
            y,
            kept_pairs,
            skipped: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

/// Stacks the vectors of every pair whose words are both in vocabulary, in
/// dictionary order.
pub fn pair_matrices(dict: &SeedDictionary, source: &EmbeddingSpace, target: &EmbeddingSpace) -> Result<PairedMatrix> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut kept_pairs = Vec::new();
    let mut skipped = 0;
    for (s, t) in dict.pairs() {
        match (source.vector(s), target.vector(t)) {
            (Some(xv), Some(yv)) => {
                xs.extend_from_slice(xv);
                ys.extend_from_slice(yv);
                kept_pairs.push((s.clone(), t.clone()));
            }
            _ => skipped += 1,
        }
    }
    if kept_pairs.is_empty() {
        return Err(Error::Invalid("no in-vocabulary pairs".into()));
    }
    let n = kept_pairs.len();
    Ok(PairedMatrix {
        x: linalg::from_rows(&xs, n, source.dim()),
        y: linalg::from_rows(&ys, n, target.dim()),
        kept_pairs,
        skipped,
    })
}

/// The CCA-specific parts of a fitted map.
#[derive(Clone, Debug, PartialEq)]
pub struct CcaParts {
    /// `d_s × k` source canonical directions.
    pub a: DMatrix<f64>,
    /// `d_t × k` target canonical directions.
    pub b: DMatrix<f64>,
    /// Canonical correlations, descending.
    pub correlations: Vec<f64>,
    pub ridge_source: f64,
    pub ridge_target: f64,
}

impl CcaParts {
    pub fn k(&self) -> usize {
        self.correlations.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMap {
    pub method: Method,
    /// `d_s × d_t` composed source → target map.
    pub w: DMatrix<f64>,
    pub source_mean: Option<DVector<f64>>,
    pub target_mean: Option<DVector<f64>>,
    pub cca: Option<CcaParts>,
}

impl ProjectionMap {
    pub fn source_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn orthogonal(&self) -> bool {
        self.method == Method::Procrustes
    }

    /// `‖WᵀW − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let wtw = self.w.transpose() * &self.w;
        (wtw - DMatrix::<f64>::identity(self.target_dim(), self.target_dim())).norm()
    }

    /// Maps one source vector into target coordinates.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_rows(x, 1)
    }

    /// Maps `n` row-major source vectors.
    pub fn apply_rows(&self, data: &[f64], n: usize) -> Result<Vec<f64>> {
        let ds = self.source_dim();
        if data.len() != n * ds {
            return Err(Error::Dimension(format!(
                "map expects source dimension {ds}, got {} values for {n} rows",
                data.len()
            )));
        }
        let mut x = linalg::from_rows(data, n, ds);
        if let Some(mu) = &self.source_mean {
            x = linalg::center_rows(&x, mu);
        }
        let mut out = x * &self.w;
        if let Some(mu) = &self.target_mean {
            for mut row in out.row_iter_mut() {
                for (v, m) in row.iter_mut().zip(mu.iter()) {
                    *v += m;
                }
            }
        }
        Ok(linalg::to_rows(&out))
    }
}

/// Options shared by the least-squares and Procrustes fits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Center both sides on their seed means before fitting.
    pub center: bool,
}

fn centered(
    pm: &PairedMatrix,
    center: bool,
) -> (DMatrix<f64>, DMatrix<f64>, Option<DVector<f64>>, Option<DVector<f64>>) {
    if center {
        let mx = linalg::column_means(&pm.x);
        let my = linalg::column_means(&pm.y);
        (
            linalg::center_rows(&pm.x, &mx),
            linalg::center_rows(&pm.y, &my),
            Some(mx),
            Some(my),
        )
    } else {
        (pm.x.clone(), pm.y.clone(), None, None)
    }
}

/// `W = argmin ‖XW − Y‖²_F + ridge‖W‖²_F` through the normal equations.
pub fn fit_least_squares(pm: &PairedMatrix, ridge: f64, opts: FitOptions) -> Result<ProjectionMap> {
    if !(ridge >= 0.0) {
        return Err(Error::Invalid(format!("ridge must be non-negative, got {ridge}")));
    }
    let (x, y, source_mean, target_mean) = centered(pm, opts.center);
    let d = x.ncols();
    let mut gram = x.transpose() * &x;
    for i in 0..d {
        gram[(i, i)] += ridge;
    }
    let rhs = x.transpose() * &y;
    let singular = || {
        Error::Numerical(format!(
            "normal equations are singular (n = {}, d = {d}); use a positive ridge",
            x.nrows()
        ))
    };
    let chol = gram.cholesky().ok_or_else(singular)?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::MAX, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // cond(XᵀX) = (hi/lo)² for the Cholesky factor; beyond ~1e14 the solve is noise.
    if !(lo > 1e-7 * hi) {
        return Err(singular());
    }
    let w = chol.solve(&rhs);
    Ok(ProjectionMap {
        method: Method::LeastSquares,
        w,
        source_mean,
        target_mean,
        cca: None,
    })
}

/// `W = UVᵀ` from the SVD `XᵀY = UΣVᵀ`.
pub fn fit_procrustes(pm: &PairedMatrix, opts: FitOptions) -> Result<ProjectionMap> {
    let (ds, dt) = (pm.x.ncols(), pm.y.ncols());
    if ds != dt {
        return Err(Error::Dimension(format!(
            "procrustes needs equal dimensions, source {ds} vs target {dt}"
        )));
    }
    if pm.n() < ds {
        log::warn!(
            "procrustes fit on {} pairs in dimension {ds}: solution is not unique",
            pm.n()
        );
    }
    let (x, y, source_mean, target_mean) = centered(pm, opts.center);
    let cross = x.transpose() * y;
    let svd = linalg::svd(&cross)?;
    let top = svd.singular_values[0];
    if svd.singular_values.last().is_some_and(|&s| s <= 1e-12 * top) {
        log::warn!("procrustes: cross-covariance is rank deficient, the rotation is not unique");
    }
    let w = &svd.u * svd.v.transpose();
    Ok(ProjectionMap {
        method: Method::Procrustes,
        w,
        source_mean,
        target_mean,
        cca: None,
    })
}

/// Ridge added to each covariance diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ridge {
    /// `1e-5 ×` the mean diagonal of each covariance.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcaOptions {
    pub keep_ratio: f64,
    pub ridge: Ridge,
}

impl Default for CcaOptions {
    fn default() -> Self {
        Self {
            keep_ratio: 1.0,
            ridge: Ridge::Auto,
        }
    }
}

fn covariance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * b / a.nrows() as f64
}

fn add_ridge(c: &mut DMatrix<f64>, ridge: Ridge) -> f64 {
    let d = c.nrows();
    let r = match ridge {
        Ridge::Fixed(r) => r,
        Ridge::Auto => 1e-5 * c.trace() / d as f64,
    };
    for i in 0..d {
        c[(i, i)] += r;
    }
    r
}

/// Canonical correlation analysis composed back into the target space:
/// `W = A·B⁺`.
pub fn fit_cca(pm: &PairedMatrix, opts: CcaOptions) -> Result<ProjectionMap> {
    let n = pm.n();
    if n < 2 {
        return Err(Error::Invalid("cca needs at least 2 pairs".into()));
    }
    if !(opts.keep_ratio > 0.0 && opts.keep_ratio <= 1.0) {
        return Err(Error::Invalid(format!("keep_ratio {} outside (0, 1]", opts.keep_ratio)));
    }
    if let Ridge::Fixed(r) = opts.ridge {
        if !(r >= 0.0) {
            return Err(Error::Invalid(format!("ridge must be non-negative, got {r}")));
        }
    }
    let mx = linalg::column_means(&pm.x);
    let my = linalg::column_means(&pm.y);
    let xc = linalg::center_rows(&pm.x, &mx);
    let yc = linalg::center_rows(&pm.y, &my);

    let mut cxx = covariance(&xc, &xc);
    let mut cyy = covariance(&yc, &yc);
    let cxy = covariance(&xc, &yc);
    let ridge_source = add_ridge(&mut cxx, opts.ridge);
    let ridge_target = add_ridge(&mut cyy, opts.ridge);

    let wx = linalg::inverse_sqrt_spd(&cxx, "source")?;
    let wy = linalg::inverse_sqrt_spd(&cyy, "target")?;
    let m = &wx * cxy * &wy;
    let svd = linalg::svd(&m)?;

    let min_dim = pm.x.ncols().min(pm.y.ncols());
    let k = ((opts.keep_ratio * min_dim as f64) - 1e-9).ceil().max(1.0) as usize;
    let k = k.min(svd.singular_values.len());
    let a = wx * svd.u.columns(0, k);
    let b = wy * svd.v.columns(0, k);
    let correlations = svd.singular_values[..k].to_vec();
    let w = &a * linalg::pseudo_inverse(&b, 1e-12)?;

    Ok(ProjectionMap {
        method: Method::Cca,
        w,
        source_mean: Some(mx),
        target_mean: Some(my),
        cca: Some(CcaParts {
            a,
            b,
            correlations,
            ridge_source,
            ridge_target,
        }),
    })
}

/// Fits `method` with its default options.
pub fn fit(method: Method, pm: &PairedMatrix, settings: &AlignSettings) -> Result<ProjectionMap> {
    match method {
        Method::Cca => fit_cca(pm, settings.cca),
        Method::LeastSquares => fit_least_squares(
            pm,
            settings.ridge,
            FitOptions {
                center: settings.center,
            },
        ),
        Method::Procrustes => fit_procrustes(
            pm,
            FitOptions {
                center: settings.center,
            },
        ),
    }
}

/// Knobs for [`fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignSettings {
    pub cca: CcaOptions,
    /// Least-squares ridge.
    pub ridge: f64,
    /// Force centering for least squares and Procrustes.
    pub center: bool,
}

impl Default for AlignSettings {
    fn default() -> Self {
        Self {
            cca: CcaOptions::default(),
            ridge: 0.0,
            center: false,
        }
    }
}

/// Projects every source vector into the target space; vocabulary and
/// frequencies are kept.
pub fn project_space(source: &EmbeddingSpace, map: &ProjectionMap) -> Result<EmbeddingSpace> {
    if source.dim() != map.source_dim() {
        return Err(Error::Dimension(format!(
            "space dimension {} does not match map source dimension {}",
            source.dim(),
            map.source_dim()
        )));
    }
    let data = map.apply_rows(source.data(), source.len())?;
    source.with_vectors(map.target_dim(), data)
}

/// Which side of a CCA map to use in shared-space mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Shared canonical-space projection: `(x − μ_s)A` or `(y − μ_t)B`.
pub fn project_shared(space: &EmbeddingSpace, map: &ProjectionMap, side: Side) -> Result<EmbeddingSpace> {
    let parts = map
        .cca
        .as_ref()
        .ok_or_else(|| Error::Invalid("shared-space projection needs a cca map".into()))?;
    let (proj, mean) = match side {
        Side::Source => (&parts.a, map.source_mean.as_ref()),
        Side::Target => (&parts.b, map.target_mean.as_ref()),
    };
    if space.dim() != proj.nrows() {
        return Err(Error::Dimension(format!(
            "space dimension {} does not match canonical projection input {}",
            space.dim(),
            proj.nrows()
        )));
    }
    let mut x = linalg::from_rows(space.data(), space.len(), space.dim());
    if let Some(mu) = mean {
        x = linalg::center_rows(&x, mu);
    }
    space.with_vectors(proj.ncols(), linalg::to_rows(&(x * proj)))
}

const MAGIC: &str = "lexalign-projection-map 1";

fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "{name} {} {}", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

fn write_vector(out: &mut String, name: &str, v: Option<&DVector<f64>>) {
    match v {
        None => {
            let _ = writeln!(out, "{name} none");
        }
        Some(v) => {
            let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{name} {}", vals.join(" "));
        }
    }
}

/// Self-describing text form; every number round-trips exactly.
pub fn save_map(map: &ProjectionMap, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "method {}", map.method);
    let _ = writeln!(out, "dims {} {}", map.source_dim(), map.target_dim());
    let _ = writeln!(out, "orthogonal {}", map.orthogonal());
    write_matrix(&mut out, "W", &map.w);
    write_vector(&mut out, "source_mean", map.source_mean.as_ref());
    write_vector(&mut out, "target_mean", map.target_mean.as_ref());
    if let Some(c) = &map.cca {
        let _ = writeln!(out, "cca k {} ridge {} {}", c.k(), c.ridge_source, c.ridge_target);
        let corr: Vec<String> = c.correlations.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "correlations {}", corr.join(" "));
        write_matrix(&mut out, "A", &c.a);
        write_matrix(&mut out, "B", &c.b);
    }
    out.push_str("end\n");
    write_text(path.as_ref(), &out)
}

struct Lines<'a> {
    path: &'a Path,
    iter: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.iter
            .next()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .ok_or_else(|| Error::parse(self.path, 0, "unexpected end of map file"))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, line) = self.next()?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(key) {
            return Err(Error::parse(self.path, no, format!("expected {key:?}, found {line:?}")));
        }
        Ok((no, fields.collect()))
    }

    fn floats(&self, no: usize, fields: &[&str]) -> Result<Vec<f64>> {
        fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(self.path, no, format!("bad number {f:?}")))
            })
            .collect()
    }

    fn usize(&self, no: usize, field: Option<&&str>) -> Result<usize> {
        field
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::parse(self.path, no, "expected an integer"))
    }

    fn matrix(&mut self, key: &str) -> Result<DMatrix<f64>> {
        let (no, fields) = self.keyed(key)?;
        let rows = self.usize(no, fields.first())?;
        let cols = self.usize(no, fields.get(1))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (no, line) = self.next()?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != cols {
                return Err(Error::parse(self.path, no, format!("expected {cols} values")));
            }
            data.extend(self.floats(no, &fields)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }

    fn vector(&mut self, key: &str) -> Result<Option<DVector<f64>>> {
        let (no, fields) = self.keyed(key)?;
        if fields == ["none"] {
            return Ok(None);
        }
        Ok(Some(DVector::from_vec(self.floats(no, &fields)?)))
    }
}

pub fn load_map(path: impl AsRef<Path>) -> Result<ProjectionMap> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let mut lines = Lines {
        path,
        iter: text.lines().enumerate().peekable(),
    };
    let (no, magic) = lines.next()?;
    if magic != MAGIC {
        return Err(Error::parse(path, no, "not a projection map file"));
    }
    let (no, fields) = lines.keyed("method")?;
    let method: Method = fields
        .first()
        .ok_or_else(|| Error::parse(path, no, "missing method"))?
        .parse()
        .map_err(|e: Error| Error::parse(path, no, e.to_string()))?;
    let (no, dims) = lines.keyed("dims")?;
    let ds = lines.usize(no, dims.first())?;
    let dt = lines.usize(no, dims.get(1))?;
    lines.keyed("orthogonal")?;
    let w = lines.matrix("W")?;
    if w.shape() != (ds, dt) {
        return Err(Error::parse(path, no, "W shape disagrees with dims"));
    }
    let source_mean = lines.vector("source_mean")?;
    let target_mean = lines.vector("target_mean")?;
    let cca = if method == Method::Cca {
        let (no, f) = lines.keyed("cca")?;
        let parse = |i: usize| -> Result<f64> {
            f.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(path, no, "bad cca header"))
        };
        let ridge_source = parse(3)?;
        let ridge_target = parse(4)?;
        let (no, corr) = lines.keyed("correlations")?;
        let correlations = lines.floats(no, &corr)?;
        let a = lines.matrix("A")?;
        let b = lines.matrix("B")?;
        Some(CcaParts {
            a,
            b,
            correlations,
            ridge_source,
            ridge_target,
        })
    } else {
        None
    };
    lines.keyed("end")?;
    Ok(ProjectionMap {
        method,
        w,
        source_mean,
        target_mean,
        cca,
    })
}
