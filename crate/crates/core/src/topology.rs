//! Network layouts and the network-centric square-grid clustering.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A point on the deployment square, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions of the single-antenna APs and users on a square area.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub side_length: f64,
    pub ap_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
}

impl NetworkLayout {
    pub fn ap_count(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn user_count(&self) -> usize {
        self.user_positions.len()
    }

    /// AP–user distances, `d[m][k]`.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        self.ap_positions
            .iter()
            .map(|ap| self.user_positions.iter().map(|u| ap.distance(u)).collect())
            .collect()
    }
}

fn uniform_points<R: Rng>(rng: &mut R, count: usize, side: f64) -> Vec<Point> {
    (0..count)
        .map(|_| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            Point::new(x, y)
        })
        .collect()
}

fn check_sizes(m: usize, k: usize, side: f64) -> Result<()> {
    if m == 0 || k == 0 {
        return Err(Error::Config(format!(
            "layout needs at least one AP and one user (got M={m}, K={k})"
        )));
    }
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::Config(format!("side length must be positive, got {side}")));
    }
    Ok(())
}

/// Draws `m` APs and `k` users i.i.d. uniformly over a `side × side` square.
pub fn generate_layout(m: usize, k: usize, side: f64, seed: u64) -> Result<NetworkLayout> {
    check_sizes(m, k, side)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ap_positions = uniform_points(&mut rng, m, side);
    let user_positions = uniform_points(&mut rng, k, side);
    Ok(NetworkLayout {
        side_length: side,
        ap_positions,
        user_positions,
    })
}

/// Same as [`generate_layout`] but with APs and users drawn from separate
/// seeds, so a fixed AP deployment can be combined with fresh user drops.
pub fn generate_layout_split(
    m: usize,
    k: usize,
    side: f64,
    ap_seed: u64,
    user_seed: u64,
) -> Result<NetworkLayout> {
    check_sizes(m, k, side)?;
    let ap_positions = uniform_points(&mut ChaCha8Rng::seed_from_u64(ap_seed), m, side);
    let user_positions = uniform_points(&mut ChaCha8Rng::seed_from_u64(user_seed), k, side);
    Ok(NetworkLayout {
        side_length: side,
        ap_positions,
        user_positions,
    })
}

/// Assignment of every AP and user to one of `C` equal-area grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    pub cluster_count: usize,
    pub ap_cluster: Vec<usize>,
    pub user_cluster: Vec<usize>,
    pub ap_counts: Vec<usize>,
    pub user_counts: Vec<usize>,
}

impl ClusterPartition {
    /// Global AP indices of cluster `c`, ascending.
    pub fn aps_of(&self, c: usize) -> Vec<usize> {
        members(&self.ap_cluster, c)
    }

    /// Global user indices of cluster `c`, ascending.
    pub fn users_of(&self, c: usize) -> Vec<usize> {
        members(&self.user_cluster, c)
    }
}

fn members(assign: &[usize], c: usize) -> Vec<usize> {
    assign
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| (a == c).then_some(i))
        .collect()
}

/// Side of the cluster grid for `c` clusters, if `c` is a perfect square.
pub fn grid_side(c: usize) -> Option<usize> {
    if c == 0 {
        return None;
    }
    let g = (c as f64).sqrt().round() as usize;
    (g * g == c).then_some(g)
}

/// Row-major grid cell of a point; coordinates equal to `side` clamp into the
/// last row/column.
pub fn cell_of(p: &Point, side: f64, g: usize) -> usize {
    let cell = side / g as f64;
    let ix = ((p.x / cell).floor() as usize).min(g - 1);
    let iy = ((p.y / cell).floor() as usize).min(g - 1);
    ix + g * iy
}

/// Splits the square into `c = g²` equal cells and assigns nodes to cells.
pub fn partition_grid(layout: &NetworkLayout, c: usize) -> Result<ClusterPartition> {
    let g = grid_side(c).ok_or_else(|| {
        Error::Config(format!("cluster count {c} is not a perfect square grid size"))
    })?;
    let side = layout.side_length;
    let ap_cluster: Vec<usize> = layout.ap_positions.iter().map(|p| cell_of(p, side, g)).collect();
    let user_cluster: Vec<usize> =
        layout.user_positions.iter().map(|p| cell_of(p, side, g)).collect();
    let mut ap_counts = vec![0; c];
    let mut user_counts = vec![0; c];
    ap_cluster.iter().for_each(|&a| ap_counts[a] += 1);
    user_cluster.iter().for_each(|&a| user_counts[a] += 1);
    Ok(ClusterPartition {
        cluster_count: c,
        ap_cluster,
        user_cluster,
        ap_counts,
        user_counts,
    })
}

/// Writes one row per node: `kind,index,x,y,cluster`.
pub fn write_layout_csv<W: Write>(
    layout: &NetworkLayout,
    partition: &ClusterPartition,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "index", "x", "y", "cluster"])?;
    let rows = layout
        .ap_positions
        .iter()
        .zip(&partition.ap_cluster)
        .enumerate()
        .map(|(i, (p, c))| ("ap", i, p, c))
        .chain(
            layout
                .user_positions
                .iter()
                .zip(&partition.user_cluster)
                .enumerate()
                .map(|(i, (p, c))| ("user", i, p, c)),
        );
    for (kind, i, p, c) in rows {
        w.write_record([
            kind.to_string(),
            i.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            c.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
