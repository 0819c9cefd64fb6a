//! Scalar fields on a box, as collocation samples or as sine-mode coefficients,
//! and the exact discrete sine transforms between the two.
//!
//! Grid nodes are the interior sine-transform nodes `x = a m/(n+1)`. For modes
//! `k ≤ n` the rule `Σ_m φ_j(x_m) φ_k(x_m) · a/(n+1) = δ_jk` holds exactly, so
//! the forward transform inverts the inverse transform on band-limited data.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::domain::{Domain, Mode, ModeIter};
use crate::error::{Error, Result};
use crate::tensor;

/// Samples at the interior collocation nodes, row-major with the last axis fastest.
/// Boundary values are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    domain: Domain,
    resolution: Vec<usize>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(domain: Domain, resolution: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_resolution(&domain, &resolution)?;
        let expected: usize = resolution.iter().product();
        if values.len() != expected {
            return Err(Error::Mismatch(format!(
                "grid of resolution {resolution:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { domain, resolution, values })
    }

    pub fn zeros(domain: &Domain, resolution: &[usize]) -> Result<Self> {
        let len = resolution.iter().product();
        Self::new(domain.clone(), resolution.to_vec(), vec![0.0; len])
    }

    /// Samples `f` at every collocation node.
    pub fn from_fn(domain: &Domain, resolution: &[usize], mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        check_resolution(domain, resolution)?;
        let axes = domain.axis_nodes(resolution);
        let len: usize = resolution.iter().product();
        let mut x = vec![0.0; resolution.len()];
        let values = (0..len)
            .map(|flat| {
                fill_point(&axes, resolution, flat, &mut x);
                f(&x)
            })
            .collect();
        Ok(Self { domain: domain.clone(), resolution: resolution.to_vec(), values })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn axis_nodes(&self) -> Vec<Vec<f64>> {
        self.domain.axis_nodes(&self.resolution)
    }

    /// Coordinates of the node with the given flat (row-major) offset.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let axes = self.axis_nodes();
        let mut x = vec![0.0; self.resolution.len()];
        fill_point(&axes, &self.resolution, flat, &mut x);
        x
    }

    /// Every node with its value.
    pub fn points(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let axes = self.axis_nodes();
        self.values.iter().enumerate().map(move |(flat, &v)| {
            let mut x = vec![0.0; self.resolution.len()];
            fill_point(&axes, &self.resolution, flat, &mut x);
            (x, v)
        })
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        self.domain == other.domain && self.resolution == other.resolution
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            domain: self.domain.clone(),
            resolution: self.resolution.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> GridField {
        self.map(|v| c * v)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridField, b: f64) -> Result<GridField> {
        self.check_same(other)?;
        Ok(GridField {
            domain: self.domain.clone(),
            resolution: self.resolution.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// `max |self - other|`.
    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_same(&self, other: &GridField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "grids differ: {:?} on {:?} vs {:?} on {:?}",
                self.resolution,
                self.domain.lengths(),
                other.resolution,
                other.domain.lengths()
            )))
        }
    }

    /// Weight of the uniform interior rule `Π a_i/(n_i+1)`; with zero boundary
    /// values it is the composite trapezoid rule.
    pub fn cell_volume(&self) -> f64 {
        self.resolution.iter().zip(self.domain.lengths()).map(|(&n, &a)| a / (n + 1) as f64).product()
    }

    pub fn integral(&self) -> f64 {
        self.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// Value at an arbitrary point of the closure, from the full sine interpolant.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        let coeffs = forward_transform_orders(self, &self.resolution)?;
        coeffs.evaluate(x)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// `# domain: a1,...,aN; resolution: n1,...,nN` followed by rows `x_1..x_N,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# domain: {}; resolution: {}", join(self.domain.lengths()), join(&self.resolution))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for (x, v) in self.points() {
            let mut record: Vec<String> = x.iter().map(|c| c.to_string()).collect();
            record.push(v.to_string());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let meta = parse_header(&header, "resolution")?;
        let domain = Domain::new(meta.lengths)?;
        let resolution = meta.counts;
        let dim = domain.dim();
        if resolution.len() != dim {
            return Err(Error::Parse(format!(
                "resolution has {} entries for a {dim}-dimensional domain",
                resolution.len()
            )));
        }
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        for record in csv_reader.records() {
            let record = record?;
            if record.len() != dim + 1 {
                return Err(Error::Parse(format!("expected {} columns, found {}", dim + 1, record.len())));
            }
            values.push(parse_f64(&record[dim])?);
        }
        GridField::new(domain, resolution, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Sine-mode coefficients `c_k` for `1 ≤ k_i ≤ orders[i]`, stored densely.
/// Modes beyond the orders are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    domain: Domain,
    orders: Vec<usize>,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(domain: &Domain, orders: &[usize]) -> Result<Self> {
        check_resolution(domain, orders)?;
        Ok(Self {
            domain: domain.clone(),
            orders: orders.to_vec(),
            coeffs: vec![0.0; orders.iter().product()],
        })
    }

    pub fn from_coeffs(domain: Domain, orders: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        check_resolution(&domain, &orders)?;
        if coeffs.len() != orders.iter().product::<usize>() {
            return Err(Error::Mismatch(format!(
                "orders {orders:?} need {} coefficients, got {}",
                orders.iter().product::<usize>(),
                coeffs.len()
            )));
        }
        Ok(Self { domain, orders, coeffs })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    fn offset(&self, mode: &Mode) -> Option<usize> {
        if mode.dim() != self.orders.len() {
            return None;
        }
        let mut flat = 0;
        for (&k, &order) in mode.index().iter().zip(&self.orders) {
            if k > order {
                return None;
            }
            flat = flat * order + (k - 1);
        }
        Some(flat)
    }

    pub fn get(&self, mode: &Mode) -> f64 {
        self.offset(mode).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set(&mut self, mode: &Mode, value: f64) -> Result<()> {
        let i = self.offset(mode).ok_or_else(|| Error::Truncation {
            order: mode.index().iter().copied().max().unwrap_or(0),
            resolution: self.orders.iter().copied().min().unwrap_or(0),
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Modes in storage order, paired with their coefficients.
    pub fn iter(&self) -> impl Iterator<Item = (Mode, f64)> + '_ {
        ModeIter::new(&self.orders).zip(self.coeffs.iter().copied())
    }

    /// `Σ c_k φ_k(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if !self.domain.contains_closure(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        let tables: Vec<Vec<f64>> = (0..self.orders.len())
            .map(|d| tensor::sine_table_points(self.domain.lengths()[d], &x[d..=d], self.orders[d]))
            .collect();
        let mats: Vec<&[f64]> = tables.iter().map(Vec::as_slice).collect();
        let ones = vec![1; self.orders.len()];
        Ok(tensor::contract_all(&self.coeffs, &self.orders, &mats, &ones)[0])
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `# domain: ...; orders: ...` followed by rows `k_1..k_N,coefficient`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# domain: {}; orders: {}", join(self.domain.lengths()), join(&self.orders))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for (mode, c) in self.iter() {
            let mut record: Vec<String> = mode.index().iter().map(|k| k.to_string()).collect();
            record.push(c.to_string());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let meta = parse_header(&header, "orders")?;
        let domain = Domain::new(meta.lengths)?;
        let mut field = SpectralField::zeros(&domain, &meta.counts)?;
        let dim = domain.dim();
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        for record in csv_reader.records() {
            let record = record?;
            if record.len() != dim + 1 {
                return Err(Error::Parse(format!("expected {} columns, found {}", dim + 1, record.len())));
            }
            let index = (0..dim)
                .map(|d| {
                    record[d]
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("mode index {:?}: {e}", &record[d])))
                })
                .collect::<Result<Vec<_>>>()?;
            field.set(&Mode::new(index)?, parse_f64(&record[dim])?)?;
        }
        Ok(field)
    }
}

/// Projection of grid samples onto `φ_k`, `k_i ≤ order` in every axis.
///
/// Exact for samples of sine sums with modes `≤ n`.
pub fn forward_transform(u: &GridField, order: usize) -> Result<SpectralField> {
    forward_transform_orders(u, &vec![order; u.domain.dim()])
}

pub fn forward_transform_orders(u: &GridField, orders: &[usize]) -> Result<SpectralField> {
    check_resolution(&u.domain, orders)?;
    for (&k, &n) in orders.iter().zip(&u.resolution) {
        if k > n {
            return Err(Error::Truncation { order: k, resolution: n });
        }
    }
    let mats = forward_matrices(&u.domain, &u.resolution, orders);
    let refs: Vec<&[f64]> = mats.iter().map(Vec::as_slice).collect();
    let coeffs = tensor::contract_all(&u.values, &u.resolution, &refs, orders);
    Ok(SpectralField { domain: u.domain.clone(), orders: orders.to_vec(), coeffs })
}

/// Pointwise evaluation of `Σ c_k φ_k` at the collocation nodes.
pub fn inverse_transform(c: &SpectralField, resolution: &[usize]) -> Result<GridField> {
    check_resolution(&c.domain, resolution)?;
    let mats = inverse_matrices(&c.domain, resolution, &c.orders);
    let refs: Vec<&[f64]> = mats.iter().map(Vec::as_slice).collect();
    let values = tensor::contract_all(&c.coeffs, &c.orders, &refs, resolution);
    Ok(GridField { domain: c.domain.clone(), resolution: resolution.to_vec(), values })
}

/// Precomputed transform pair for a fixed grid and truncation, reused by
/// iterative solvers that transform many fields on the same grid.
#[derive(Debug, Clone)]
pub(crate) struct SineTransform {
    domain: Domain,
    resolution: Vec<usize>,
    orders: Vec<usize>,
    forward: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
}

impl SineTransform {
    pub(crate) fn new(domain: &Domain, resolution: &[usize], orders: &[usize]) -> Result<Self> {
        check_resolution(domain, resolution)?;
        check_resolution(domain, orders)?;
        for (&k, &n) in orders.iter().zip(resolution) {
            if k > n {
                return Err(Error::Truncation { order: k, resolution: n });
            }
        }
        Ok(Self {
            domain: domain.clone(),
            resolution: resolution.to_vec(),
            orders: orders.to_vec(),
            forward: forward_matrices(domain, resolution, orders),
            inverse: inverse_matrices(domain, resolution, orders),
        })
    }

    pub(crate) fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub(crate) fn modes(&self) -> usize {
        self.orders.iter().product()
    }

    pub(crate) fn forward(&self, values: &[f64]) -> Vec<f64> {
        let refs: Vec<&[f64]> = self.forward.iter().map(Vec::as_slice).collect();
        tensor::contract_all(values, &self.resolution, &refs, &self.orders)
    }

    pub(crate) fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let refs: Vec<&[f64]> = self.inverse.iter().map(Vec::as_slice).collect();
        tensor::contract_all(coeffs, &self.orders, &refs, &self.resolution)
    }

    pub(crate) fn grid(&self, values: Vec<f64>) -> GridField {
        GridField { domain: self.domain.clone(), resolution: self.resolution.clone(), values }
    }

    /// Eigenvalues `λ_k` in coefficient storage order.
    pub(crate) fn eigenvalues(&self) -> Vec<f64> {
        ModeIter::new(&self.orders).map(|m| self.domain.eigenvalue(&m)).collect()
    }
}

/// Per-axis `(n × K)` matrices `a/(n+1) · φ_k(x_m)`.
fn forward_matrices(domain: &Domain, resolution: &[usize], orders: &[usize]) -> Vec<Vec<f64>> {
    resolution
        .iter()
        .zip(orders)
        .zip(domain.lengths())
        .map(|((&n, &k), &a)| {
            let table = tensor::sine_table_nodes(a, n, k);
            let w = a / (n + 1) as f64;
            tensor::transpose(&table, k, n).into_iter().map(|v| v * w).collect()
        })
        .collect()
}

/// Per-axis `(K × n)` matrices `φ_k(x_m)`.
fn inverse_matrices(domain: &Domain, resolution: &[usize], orders: &[usize]) -> Vec<Vec<f64>> {
    resolution
        .iter()
        .zip(orders)
        .zip(domain.lengths())
        .map(|((&n, &k), &a)| tensor::sine_table_nodes(a, n, k))
        .collect()
}

fn check_resolution(domain: &Domain, resolution: &[usize]) -> Result<()> {
    if resolution.len() != domain.dim() {
        return Err(Error::Mismatch(format!(
            "{} sizes given for a {}-dimensional domain",
            resolution.len(),
            domain.dim()
        )));
    }
    if resolution.contains(&0) {
        return Err(Error::Mismatch("grid sizes must be positive".into()));
    }
    Ok(())
}

fn fill_point(axes: &[Vec<f64>], resolution: &[usize], mut flat: usize, x: &mut [f64]) {
    for axis in (0..resolution.len()).rev() {
        x[axis] = axes[axis][flat % resolution[axis]];
        flat /= resolution[axis];
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

struct Header {
    lengths: Vec<f64>,
    counts: Vec<usize>,
}

fn parse_header(line: &str, counts_key: &str) -> Result<Header> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("missing '# domain: ...' header, got {line:?}")))?;
    let mut lengths = None;
    let mut counts = None;
    for part in body.split(';') {
        let (key, value) =
            part.split_once(':').ok_or_else(|| Error::Parse(format!("bad header field {part:?}")))?;
        let items = value.split(',').map(str::trim).filter(|s| !s.is_empty());
        match key.trim() {
            "domain" => lengths = Some(items.map(parse_f64).collect::<Result<Vec<_>>>()?),
            k if k == counts_key => {
                counts = Some(
                    items
                        .map(|s| {
                            s.parse::<usize>().map_err(|e| Error::Parse(format!("{counts_key} {s:?}: {e}")))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            other => return Err(Error::Parse(format!("unknown header field {other:?}"))),
        }
    }
    match (lengths, counts) {
        (Some(lengths), Some(counts)) => Ok(Header { lengths, counts }),
        _ => Err(Error::Parse(format!("header needs 'domain' and '{counts_key}' fields"))),
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("number {s:?}: {e}")))
}
