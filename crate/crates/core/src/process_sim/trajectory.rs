use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size in bytes of the binary header: d, count, η, T, seed.
pub const BINARY_HEADER_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    /// Step size (time increment between consecutive recorded points).
    pub eta: f64,
    /// Time of the last recorded point.
    pub horizon: f64,
    pub seed: u64,
}

/// Time-indexed sequence of parameter vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    points: Vec<f64>,
    meta: TrajectoryMeta,
    truncated: bool,
}

impl Trajectory {
    pub fn new(dim: usize, times: Vec<f64>, points: Vec<f64>, meta: TrajectoryMeta) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "dimension must be at least 1"));
        }
        if times.is_empty() {
            return Err(Error::Empty("trajectory has no points"));
        }
        if points.len() != times.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: times.len() * dim,
                got: points.len(),
            });
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("times", "first time must be 0"));
        }
        if times.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
            return Err(Error::invalid("times", "times must be strictly increasing"));
        }
        if let Some(k) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                step: k / dim,
                what: "trajectory coordinate".into(),
            });
        }
        Ok(Self {
            dim,
            times,
            points,
            meta,
            truncated: false,
        })
    }

    /// Starts a trajectory at time 0 with the given point; used by simulators.
    pub(crate) fn start(initial: &[f64], meta: TrajectoryMeta, capacity: usize) -> Self {
        let mut points = Vec::with_capacity(capacity * initial.len());
        points.extend_from_slice(initial);
        let mut times = Vec::with_capacity(capacity);
        times.push(0.0);
        Self {
            dim: initial.len(),
            times,
            points,
            meta,
            truncated: false,
        }
    }

    pub(crate) fn push(&mut self, t: f64, point: &[f64]) {
        debug_assert_eq!(point.len(), self.dim);
        self.times.push(t);
        self.points.extend_from_slice(point);
    }

    pub(crate) fn mark_truncated(&mut self) {
        self.truncated = true;
        self.meta.horizon = *self.times.last().unwrap();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Row-major coordinates, `len() * dim()` values.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn last(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    pub fn meta(&self) -> TrajectoryMeta {
        self.meta
    }

    /// True when a simulation stopped early on divergence.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Keeps points `range` and shifts times to restart at 0.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::invalid("range", format!("{range:?} outside 0..{}", self.len())));
        }
        let t0 = self.times[range.start];
        let times = self.times[range.clone()].iter().map(|t| t - t0).collect::<Vec<_>>();
        let points = self.points[range.start * self.dim..range.end * self.dim].to_vec();
        let mut meta = self.meta;
        meta.horizon = *times.last().unwrap();
        Trajectory::new(self.dim, times, points, meta)
    }

    /// Writes the columnar binary form: a 40-byte little-endian header
    /// `{d: u64, count: u64, η: f64, T: f64, seed: u64}` followed by the
    /// row-major points as little-endian f64. Times are implied by the
    /// uniform grid `i·T/(count−1)`, so only uniformly spaced trajectories
    /// can be written.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.is_uniform() {
            return Err(Error::Format("binary form requires a uniform time grid".into()));
        }
        out.write_all(&(self.dim as u64).to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&self.meta.eta.to_le_bytes())?;
        out.write_all(&self.times.last().unwrap().to_le_bytes())?;
        out.write_all(&self.meta.seed.to_le_bytes())?;
        for x in &self.points {
            out.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; BINARY_HEADER_LEN];
        input
            .read_exact(&mut header)
            .map_err(|e| Error::Format(format!("short header: {e}")))?;
        let word = |i: usize| {
            let mut b = [0u8; 8];
            b.copy_from_slice(&header[i * 8..(i + 1) * 8]);
            b
        };
        let dim = u64::from_le_bytes(word(0)) as usize;
        let count = u64::from_le_bytes(word(1)) as usize;
        let eta = f64::from_le_bytes(word(2));
        let horizon = f64::from_le_bytes(word(3));
        let seed = u64::from_le_bytes(word(4));
        if dim == 0 || count == 0 {
            return Err(Error::Format(format!("bad header d={dim} count={count}")));
        }
        let total = dim
            .checked_mul(count)
            .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        if body.len() != total * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                total * 8,
                body.len()
            )));
        }
        let points = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let times = uniform_grid(count, horizon);
        Trajectory::new(dim, times, points, TrajectoryMeta { eta, horizon, seed })
    }

    /// CSV with header `t,w0,…,w{d-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..self.dim).map(|i| format!("w{i}")));
        w.write_record(&header)?;
        for (t, p) in self.times.iter().zip(self.iter_points()) {
            let mut row = Vec::with_capacity(self.dim + 1);
            row.push(t.to_string());
            row.extend(p.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn is_uniform(&self) -> bool {
        let n = self.len();
        if n < 3 {
            return true;
        }
        let horizon = self.times[n - 1];
        let grid = uniform_grid(n, horizon);
        self.times
            .iter()
            .zip(&grid)
            .all(|(a, b)| (a - b).abs() <= 1e-9 * horizon.max(1.0))
    }
}

pub(crate) fn uniform_grid(count: usize, horizon: f64) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    let last = (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                horizon
            } else {
                horizon * i as f64 / last
            }
        })
        .collect()
}

/// Piecewise-linear refinement: every interval is split into `resolution`
/// equal sub-intervals. The result has `(len − 1)·resolution + 1` points and
/// keeps every original point bit-exactly.
pub fn interpolate(traj: &Trajectory, resolution: usize) -> Result<Trajectory> {
    if resolution == 0 {
        return Err(Error::invalid("resolution", "must be at least 1"));
    }
    if resolution == 1 || traj.len() == 1 {
        return Ok(traj.clone());
    }
    let d = traj.dim;
    let n_out = (traj.len() - 1) * resolution + 1;
    let mut out = Trajectory::start(traj.point(0), traj.meta, n_out);
    let mut buf = vec![0.0; d];
    for k in 0..traj.len() - 1 {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        let (a, b) = (traj.point(k), traj.point(k + 1));
        for j in 1..resolution {
            let s = j as f64 / resolution as f64;
            for i in 0..d {
                buf[i] = a[i] + s * (b[i] - a[i]);
            }
            out.push(t0 + s * (t1 - t0), &buf);
        }
        out.push(t1, b);
    }
    out.meta.eta = traj.meta.eta / resolution as f64;
    out.truncated = traj.truncated;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn meta() -> TrajectoryMeta {
        TrajectoryMeta {
            eta: 1.0,
            horizon: 1.0,
            seed: 0,
        }
    }

    #[test]
    fn rejects_bad_times() {
        assert!(Trajectory::new(1, vec![0.0, 0.0], vec![1.0, 2.0], meta()).is_err());
        assert!(Trajectory::new(1, vec![0.5, 1.0], vec![1.0, 2.0], meta()).is_err());
        assert!(Trajectory::new(1, vec![0.0, 1.0], vec![1.0], meta()).is_err());
        assert!(Trajectory::new(1, vec![0.0, 1.0], vec![1.0, f64::INFINITY], meta()).is_err());
    }

    #[test]
    fn midpoint_insertion() {
        let t = Trajectory::new(1, vec![0.0, 1.0], vec![0.0, 2.0], meta()).unwrap();
        let r = interpolate(&t, 2).unwrap();
        assert_eq!(r.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(r.points(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn resolution_one_is_identity() {
        let t = Trajectory::new(2, vec![0.0, 0.3, 1.0], vec![0.0, 1.0, 2.0, 3.0, 5.0, 8.0], meta()).unwrap();
        assert_eq!(interpolate(&t, 1).unwrap(), t);
        assert!(interpolate(&t, 0).is_err());
    }

    #[test]
    fn binary_header_layout() {
        let t = Trajectory::new(
            2,
            vec![0.0, 0.5, 1.0],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            TrajectoryMeta {
                eta: 0.5,
                horizon: 1.0,
                seed: 42,
            },
        )
        .unwrap();
        let mut bytes = Vec::new();
        t.write_binary(&mut bytes).unwrap();
        assert_eq!(bytes.len(), BINARY_HEADER_LEN + 6 * 8);
        assert_eq!(&bytes[0..8], &2u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &3u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &0.5f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[32..40], &42u64.to_le_bytes());
        assert_eq!(&bytes[40..48], &1.0f64.to_le_bytes());
        assert_eq!(Trajectory::read_binary(&bytes[..]).unwrap(), t);
        assert!(Trajectory::read_binary(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn non_uniform_grid_cannot_be_written_as_binary() {
        let t = Trajectory::new(1, vec![0.0, 0.1, 1.0], vec![0.0; 3], meta()).unwrap();
        assert!(t.write_binary(Vec::new()).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = Trajectory::new(2, vec![0.0, 1.0], vec![0.0, 1.0, 2.0, 3.5], meta()).unwrap();
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,w0,w1\n0,0,1\n1,2,3.5\n");
    }

    proptest! {
        #[test]
        fn interpolation_count_and_endpoints(
            n in 1usize..20,
            d in 1usize..4,
            res in 1usize..6,
            seed in any::<u64>(),
        ) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed);
            let times = uniform_grid(n, 2.0);
            let pts: Vec<f64> = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let t = Trajectory::new(d, times, pts, meta()).unwrap();
            let r = interpolate(&t, res).unwrap();
            prop_assert_eq!(r.len(), (n - 1) * res + 1);
            for k in 0..n {
                prop_assert_eq!(r.point(k * res), t.point(k));
                prop_assert_eq!(r.times()[k * res], t.times()[k]);
            }
        }

        #[test]
        fn binary_round_trip(n in 2usize..30, d in 1usize..5, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed);
            let pts: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * 1e3 - 500.0).collect();
            let t = Trajectory::new(
                d,
                uniform_grid(n, 0.75),
                pts,
                TrajectoryMeta { eta: 0.01, horizon: 0.75, seed },
            ).unwrap();
            let mut bytes = Vec::new();
            t.write_binary(&mut bytes).unwrap();
            let back = Trajectory::read_binary(&bytes[..]).unwrap();
            prop_assert_eq!(back.points(), t.points());
            prop_assert_eq!(back.times(), t.times());
            prop_assert_eq!(back.meta(), t.meta());
        }
    }
}
