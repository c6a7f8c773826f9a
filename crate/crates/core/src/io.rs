//! Little-endian binary containers for fields (`QML1`), wavelet coefficients (`QMLC`)
//! and phase tables (`QMLP`).

use crate::error::{QmlError, Result};
use crate::grid::{Field2D, GridSpec};
use crate::propagator::PhaseTable;
use crate::symbols::parse_graph_fn;
use crate::wavelets::{translations, CoefficientDomain, CwtCoefficients, ScaleGrid, ScaleSlice};
use ndarray::Array2;
use num_complex::Complex64;
use std::path::Path;

pub const FIELD_MAGIC: &[u8; 4] = b"QML1";
pub const COEFF_MAGIC: &[u8; 4] = b"QMLC";
pub const PHASE_MAGIC: &[u8; 4] = b"QMLP";

/// Largest accepted points per axis.
pub const MAX_N: usize = 1 << 13;
const MAX_SCALES: i64 = 4096;
const MAX_SYMBOL_LEN: usize = 4096;

fn bad(msg: impl Into<String>) -> QmlError {
    QmlError::Decode(msg.into())
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn c64(&mut self, z: Complex64) {
        self.f64(z.re);
        self.f64(z.im);
    }
    fn grid(&mut self, g: &GridSpec) {
        self.u64(g.n as u64);
        self.f64(g.half_width);
        self.f64(g.h);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], magic: &[u8; 4]) -> Result<Self> {
        if buf.len() < 4 || &buf[..4] != magic {
            return Err(bad(format!("missing magic {:?}", String::from_utf8_lossy(magic))));
        }
        Ok(Reader { buf, pos: 4 })
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(bad(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn word(&mut self) -> Result<[u8; 8]> {
        Ok(self.take(8)?.try_into().expect("eight bytes"))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.word()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.word()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.word()?))
    }
    fn c64(&mut self) -> Result<Complex64> {
        Ok(Complex64::new(self.f64()?, self.f64()?))
    }

    /// Count whose payload of `unit` bytes each must still fit in the buffer.
    fn count(&mut self, unit: usize) -> Result<usize> {
        let n = self.u64()?;
        let fits = usize::try_from(n).ok().filter(|&n| n.checked_mul(unit).is_some_and(|b| b <= self.remaining()));
        fits.ok_or_else(|| bad(format!("count {n} exceeds the remaining {} bytes", self.remaining())))
    }

    fn grid(&mut self) -> Result<GridSpec> {
        let n = self.u64()?;
        if n > MAX_N as u64 {
            return Err(bad(format!("grid size {n} exceeds {MAX_N}")));
        }
        let (half_width, h) = (self.f64()?, self.f64()?);
        GridSpec::new(half_width, n as usize, h).map_err(|e| bad(e.to_string()))
    }

    fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(bad(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

/// Encodes the physical samples; a carrier is folded in first.
pub fn encode_field(f: &Field2D) -> Vec<u8> {
    let f = f.materialize();
    let mut w = Writer(Vec::with_capacity(28 + 16 * f.values.len()));
    w.0.extend_from_slice(FIELD_MAGIC);
    w.grid(&f.grid);
    for &z in f.values.iter() {
        w.c64(z);
    }
    w.0
}

pub fn decode_field(buf: &[u8]) -> Result<Field2D> {
    let mut r = Reader::new(buf, FIELD_MAGIC)?;
    let g = r.grid()?;
    if r.remaining() != 16 * g.n * g.n {
        return Err(bad(format!("expected {} sample bytes, found {}", 16 * g.n * g.n, r.remaining())));
    }
    let mut values = Vec::with_capacity(g.n * g.n);
    for _ in 0..g.n * g.n {
        values.push(r.c64()?);
    }
    r.finish()?;
    let values = Array2::from_shape_vec((g.n, g.n), values).map_err(|e| bad(e.to_string()))?;
    Field2D::new(g, values)
}

/// Header: grid, per decade, `m_min`, `m_max`, domain (0 physical, 1 spectral), band
/// (`-1` for none), width. Each slice stores its translations then its row-major values.
pub fn encode_coefficients(x: &CwtCoefficients) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(COEFF_MAGIC);
    w.grid(&x.grid);
    w.u64(x.scales.per_decade as u64);
    w.i64(x.scales.m_min as i64);
    w.i64(x.scales.m_max as i64);
    w.u64(match x.domain {
        CoefficientDomain::Physical => 0,
        CoefficientDomain::Spectral => 1,
    });
    w.i64(x.band.map_or(-1, i64::from));
    w.u64(x.width as u64);
    for s in &x.slices {
        for &b in &s.b {
            w.f64(b);
        }
        for &z in s.values.iter() {
            w.c64(z);
        }
    }
    w.0
}

pub fn decode_coefficients(buf: &[u8]) -> Result<CwtCoefficients> {
    let mut r = Reader::new(buf, COEFF_MAGIC)?;
    let grid = r.grid()?;
    let per_decade = r.u64()?;
    let (m_min, m_max) = (r.i64()?, r.i64()?);
    let in_range = |m: i64| (-(1 << 20)..=1 << 20).contains(&m);
    if !(1..=1000).contains(&per_decade) || !in_range(m_min) || !in_range(m_max) || m_min > m_max || m_max - m_min >= MAX_SCALES {
        return Err(bad(format!("invalid scale grid ({per_decade}, {m_min}, {m_max})")));
    }
    let scales = ScaleGrid { per_decade: per_decade as u32, m_min: m_min as i32, m_max: m_max as i32 };
    let domain = match r.u64()? {
        0 => CoefficientDomain::Physical,
        1 => CoefficientDomain::Spectral,
        d => return Err(bad(format!("unknown coefficient domain {d}"))),
    };
    let band = match r.i64()? {
        -1 => None,
        b if (0..=64).contains(&b) => Some(b as u32),
        b => return Err(bad(format!("invalid band {b}"))),
    };
    let width = r.u64()?;
    if width != 1 && width != grid.n as u64 {
        return Err(bad(format!("coefficient width {width} is neither 1 nor N")));
    }
    let width = width as usize;
    let a_grid = scales.scales();
    // Translation counts scale like `8 L / a`; bound them by the payload before allocating.
    if a_grid.iter().any(|&a| !(a > 0.0) || 8.0 * grid.half_width / a > r.remaining() as f64) {
        return Err(bad("scale grid implies more translations than the payload holds"));
    }
    let axes: Vec<(f64, Vec<f64>)> = a_grid.into_iter().map(|a| (a, translations(&grid, a))).collect();
    let need = axes.iter().try_fold(0usize, |acc, (_, b)| acc.checked_add(b.len().checked_mul(8 + 16 * width)?));
    if need != Some(r.remaining()) {
        return Err(bad(format!("payload of {} bytes does not match the header", r.remaining())));
    }
    let mut slices = Vec::with_capacity(axes.len());
    for (m, (a, want)) in (scales.m_min..).zip(axes) {
        let mut b = Vec::with_capacity(want.len());
        for &expect in &want {
            let v = r.f64()?;
            if (v - expect).abs() > 1e-9 * (1.0 + expect.abs()) || !v.is_finite() {
                return Err(bad(format!("translation {v} at a = {a} is off the grid")));
            }
            b.push(v);
        }
        let mut vals = Vec::with_capacity(want.len() * width);
        for _ in 0..want.len() * width {
            vals.push(r.c64()?);
        }
        let values = Array2::from_shape_vec((want.len(), width), vals).map_err(|e| bad(e.to_string()))?;
        slices.push(ScaleSlice { m, a, b, values });
    }
    r.finish()?;
    let x = CwtCoefficients { grid, scales, domain, band, width, slices };
    x.validate()?;
    Ok(x)
}

/// Header: grid, symbol text, axes (`x1` record times, validity, kept lattice indices),
/// horizon and flow statistics; then phase and amplitude as `[x1][xi2][y2]`.
pub fn encode_phase_table(t: &PhaseTable) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(PHASE_MAGIC);
    w.grid(&t.grid);
    let sym = t.symbol.to_string();
    w.u64(sym.len() as u64);
    w.0.extend_from_slice(sym.as_bytes());
    w.u64(t.times.len() as u64);
    for (&x1, &ok) in t.times.iter().zip(&t.valid) {
        w.f64(x1);
        w.u64(ok as u64);
    }
    w.u64(t.xi_index.len() as u64);
    for &k in &t.xi_index {
        w.u64(k as u64);
    }
    for v in [t.horizon.0, t.horizon.1, t.min_jacobian, t.energy_drift, t.dt] {
        w.f64(v);
    }
    for rows in [PhaseTable::phase_row as fn(&PhaseTable, usize, usize) -> &[f64], PhaseTable::amp_row] {
        for ti in 0..t.times.len() {
            for k in 0..t.xi_index.len() {
                for &v in rows(t, ti, k) {
                    w.f64(v);
                }
            }
        }
    }
    w.0
}

pub fn decode_phase_table(buf: &[u8]) -> Result<PhaseTable> {
    let mut r = Reader::new(buf, PHASE_MAGIC)?;
    let grid = r.grid()?;
    let len = r.count(1)?;
    if len > MAX_SYMBOL_LEN {
        return Err(bad("symbol text too long"));
    }
    let text = std::str::from_utf8(r.take(len)?).map_err(|_| bad("symbol text is not UTF-8"))?;
    let symbol = parse_graph_fn(text).map_err(|e| bad(format!("symbol: {e}")))?;
    let nt = r.count(16)?;
    let mut times = Vec::with_capacity(nt);
    let mut valid = Vec::with_capacity(nt);
    for _ in 0..nt {
        times.push(r.f64()?);
        valid.push(match r.u64()? {
            0 => false,
            1 => true,
            v => return Err(bad(format!("invalid validity flag {v}"))),
        });
    }
    let nk = r.count(8)?;
    let mut xi_index = Vec::with_capacity(nk);
    for _ in 0..nk {
        let k = r.u64()?;
        if k >= grid.n as u64 {
            return Err(bad(format!("frequency index {k} outside the lattice")));
        }
        xi_index.push(k as usize);
    }
    let horizon = (r.f64()?, r.f64()?);
    let stats = [r.f64()?, r.f64()?, r.f64()?];
    let cells = nt.checked_mul(nk).and_then(|c| c.checked_mul(grid.n));
    if cells.and_then(|c| c.checked_mul(16)) != Some(r.remaining()) {
        return Err(bad(format!("payload of {} bytes does not match the axes", r.remaining())));
    }
    let cells = cells.unwrap_or(0);
    let mut read = |n: usize| (0..n).map(|_| r.f64()).collect::<Result<Vec<f64>>>();
    let phase = read(cells)?;
    let amp = read(cells)?;
    r.finish()?;
    PhaseTable::from_parts(grid, symbol, times, valid, xi_index, phase, amp, horizon, stats)
}

pub fn write_field(path: &Path, f: &Field2D) -> Result<()> {
    Ok(std::fs::write(path, encode_field(f))?)
}

pub fn read_field(path: &Path) -> Result<Field2D> {
    decode_field(&std::fs::read(path)?)
}
