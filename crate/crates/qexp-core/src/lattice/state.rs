// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::spec::{Frame, Lattice, LatticeSpec};
use crate::domain::C64;
use crate::error::{QexpError, Result};

/// Amplitudes `ψ(k, j)` on a lattice, stored row-major (`k * M + j`).
/// The norm carries the Haar weight: `‖ψ‖² = h ∑ |ψ(k, j)|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub x0: f64,
    pub data: Vec<C64>,
    /// Set when the momentum content outside the central half of the grid is
    /// known to be negligible.
    pub band_limited: bool,
}

impl StateVector {
    pub fn zeros(spec: &LatticeSpec) -> Self {
        Self {
            n: spec.n(),
            m: spec.m,
            h: spec.h,
            x0: spec.x0,
            data: vec![C64::new(0.0, 0.0); spec.len()],
            band_limited: true,
        }
    }

    pub fn from_fn(spec: &LatticeSpec, f: impl Fn(usize, f64) -> C64) -> Self {
        let mut s = Self::zeros(spec);
        for k in 0..spec.n() {
            for j in 0..spec.m {
                s.data[k * spec.m + j] = f(k, spec.x(j));
            }
        }
        s.band_limited = false;
        s
    }

    /// A state on the same grid with new amplitudes; the band-limited flag is
    /// not carried over.
    pub fn with_data(&self, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            data,
            band_limited: false,
            ..self.clone()
        }
    }

    pub fn get(&self, k: usize, j: usize) -> C64 {
        self.data[k * self.m + j]
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.h
            * self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
    }

    pub fn norm(&self) -> f64 {
        (self.h * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scale(&mut self, c: C64) {
        self.data.iter_mut().for_each(|z| *z *= c);
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        self.with_data(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        self.with_data(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect())
    }

    /// `‖self - other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        (self.h
            * self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>())
        .sqrt()
    }

    /// Fraction of `‖ψ‖` carried by momenta outside the central half.
    pub fn momentum_tail(&self, lat: &Lattice) -> f64 {
        let c = lat.to_frame(Frame::PHASE_FOURIER, &self.data);
        let spec = lat.spec();
        let mut outside = 0.0;
        let mut total = 0.0;
        for (i, z) in c.iter().enumerate() {
            total += z.norm_sqr();
            if !spec.central_momentum(i % spec.m) {
                outside += z.norm_sqr();
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (outside / total).sqrt()
        }
    }

    /// CSV with a `# N,M,h,x0` header line followed by `k,j,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# N={},M={},h={:e},x0={:e}", self.n, self.m, self.h, self.x0)?;
        writeln!(w, "k,j,re,im")?;
        for k in 0..self.n {
            for j in 0..self.m {
                let z = self.get(k, j);
                writeln!(w, "{k},{j},{:e},{:e}", z.re, z.im)?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| QexpError::Parse("empty input".into()))??;
        let (n, m, h, x0) = parse_header(&header)?;
        let mut data = vec![C64::new(0.0, 0.0); n * m];
        let mut seen = 0usize;
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('k') {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(QexpError::Parse(format!("expected 4 fields: {line}")));
            }
            let k: usize = f[0].trim().parse().map_err(|_| QexpError::Parse(line.to_string()))?;
            let j: usize = f[1].trim().parse().map_err(|_| QexpError::Parse(line.to_string()))?;
            let re: f64 = f[2].trim().parse().map_err(|_| QexpError::Parse(line.to_string()))?;
            let im: f64 = f[3].trim().parse().map_err(|_| QexpError::Parse(line.to_string()))?;
            if k >= n || j >= m {
                return Err(QexpError::Parse(format!("index out of range: {line}")));
            }
            data[k * m + j] = C64::new(re, im);
            seen += 1;
        }
        if seen != n * m {
            return Err(QexpError::Parse(format!("expected {} rows, found {seen}", n * m)));
        }
        Ok(Self {
            n,
            m,
            h,
            x0,
            data,
            band_limited: false,
        })
    }

    /// Little-endian binary: magic `QXS1`, `N`, `M` as u64, `h`, `x0` as f64,
    /// then `(re, im)` pairs in `(k, j)` order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"QXS1")?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.m as u64).to_le_bytes())?;
        w.write_all(&self.h.to_le_bytes())?;
        w.write_all(&self.x0.to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"QXS1" {
            return Err(QexpError::Parse("bad magic".into()));
        }
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let h = f64::from_le_bytes(next(&mut r)?);
        let x0 = f64::from_le_bytes(next(&mut r)?);
        if n == 0 || m == 0 || n.checked_mul(m).is_none() {
            return Err(QexpError::Parse(format!("bad dimensions {n}x{m}")));
        }
        let mut data = Vec::with_capacity(n * m);
        for _ in 0..n * m {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            data.push(C64::new(re, im));
        }
        Ok(Self {
            n,
            m,
            h,
            x0,
            data,
            band_limited: false,
        })
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, f64, f64)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| QexpError::Parse(format!("missing header: {line}")))?;
    let (mut n, mut m, mut h, mut x0) = (None, None, None, None);
    for kv in body.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| QexpError::Parse(format!("bad header field {kv}")))?;
        let v = v.trim();
        let bad = |_| QexpError::Parse(format!("bad header value {kv}"));
        match k.trim() {
            "N" => n = Some(v.parse::<usize>().map_err(|_| QexpError::Parse(kv.into()))?),
            "M" => m = Some(v.parse::<usize>().map_err(|_| QexpError::Parse(kv.into()))?),
            "h" => h = Some(v.parse::<f64>().map_err(bad)?),
            "x0" => x0 = Some(v.parse::<f64>().map_err(bad)?),
            other => return Err(QexpError::Parse(format!("unknown header field {other}"))),
        }
    }
    match (n, m, h, x0) {
        (Some(n), Some(m), Some(h), Some(x0)) => Ok((n, m, h, x0)),
        _ => Err(QexpError::Parse(format!("incomplete header: {line}"))),
    }
}

/// `ψ(k, j) = w_k exp(-(x_j - c)² / (2 width²))`, normalized.
///
/// The band-limited flag is set when the Gaussian momentum profile at the
/// edge of the central half, `exp(-(width · p_max/2)²/2)`, is below `1e-12`.
pub fn make_wavepacket(spec: &LatticeSpec, k_weights: &[C64], x_center: f64, width: f64) -> Result<StateVector> {
    if k_weights.len() != spec.n() {
        return Err(QexpError::InvalidParameter(format!(
            "need {} phase weights, got {}",
            spec.n(),
            k_weights.len()
        )));
    }
    if !(width > 0.0) {
        return Err(QexpError::InvalidParameter(format!(
            "width must be positive, got {width}"
        )));
    }
    let lo = spec.x(0) + spec.length() / 4.0;
    let hi = spec.x(0) + 3.0 * spec.length() / 4.0;
    if !(x_center >= lo && x_center <= hi) {
        return Err(QexpError::InvalidParameter(format!(
            "packet centre {x_center} outside the central half [{lo}, {hi}]"
        )));
    }
    let mut s = StateVector::from_fn(spec, |k, x| {
        let d = x - x_center;
        k_weights[k] * (-d * d / (2.0 * width * width)).exp()
    });
    let norm = s.norm();
    if norm == 0.0 {
        return Err(QexpError::InvalidParameter("phase weights are all zero".into()));
    }
    s.scale(C64::new(1.0 / norm, 0.0));
    let edge = width * spec.p_max() / 2.0;
    s.band_limited = (-edge * edge / 2.0).exp() < 1e-12;
    Ok(s)
}
