//! Radial meshes graded toward the outer boundary and the nested subdomains
//! `D_n = {dist(x, ∂D) > 1/n}`.

use crate::{Error, Result};

/// Minimum node count of a graded grid.
pub const MIN_NODES: usize = 8;

/// Strictly increasing radial nodes on `[0, R - η]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    radius: f64,
    eta: f64,
    grading: f64,
}

impl Grid {
    /// Builds a grid from arbitrary nodes. `nodes[0]` must be 0 and the last
    /// node must not exceed `radius`; `eta` is recorded as `radius - last`.
    pub fn from_nodes(nodes: Vec<f64>, radius: f64) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Domain(format!("a grid needs at least 3 nodes, got {}", nodes.len())));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Domain(format!("first node must be 0, got {}", nodes[0])));
        }
        if let Some(j) = nodes.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Domain(format!("nodes not strictly increasing at index {}", j + 1)));
        }
        let last = *nodes.last().unwrap();
        if !(radius.is_finite() && last <= radius) {
            return Err(Error::Domain(format!("last node {last} exceeds the radius {radius}")));
        }
        Ok(Self {
            nodes,
            radius,
            eta: radius - last,
            grading: 1.0,
        })
    }

    /// `m` equispaced nodes covering the whole closed interval `[0, length]`.
    pub fn uniform(length: f64, m: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Domain(format!("length must be positive, got {length}")));
        }
        if m < 3 {
            return Err(Error::Domain(format!("a grid needs at least 3 nodes, got {m}")));
        }
        let h = length / (m - 1) as f64;
        let mut nodes: Vec<f64> = (0..m).map(|j| j as f64 * h).collect();
        nodes[m - 1] = length;
        Self::from_nodes(nodes, length)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `R`, the radius of the untruncated domain.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Right end `R - η`.
    pub fn outer(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Distances `R - r_j`.
    pub fn distances(&self) -> Vec<f64> {
        self.nodes.iter().map(|r| self.radius - r).collect()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(0.0, f64::max)
    }

    /// Midpoints `r_{j+1/2}`.
    pub fn half_nodes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Piecewise-linear interpolation of nodal `values` at `r ∈ [0, outer]`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> Option<f64> {
        let n = &self.nodes;
        if values.len() != n.len() || !(r >= 0.0 && r <= self.outer()) {
            return None;
        }
        let k = n.partition_point(|x| *x <= r);
        if k == n.len() {
            return values.last().copied();
        }
        let (a, b) = (n[k - 1], n[k]);
        let t = (r - a) / (b - a);
        Some(values[k - 1] + t * (values[k] - values[k - 1]))
    }

    /// Number of leading nodes with `r_j ≤ r`.
    pub fn count_up_to(&self, r: f64) -> usize {
        self.nodes.partition_point(|x| *x <= r)
    }
}

/// Graded grid `r_j = (R - η)(1 - (1 - j/(m-1))^grading)`.
///
/// With `grading > 1` the nodes cluster toward `R - η`.
pub fn build_graded_grid(radius: f64, eta: f64, m: usize, grading: f64) -> Result<Grid> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if !(eta > 0.0 && eta < radius) {
        return Err(Error::Domain(format!("eta must lie in (0, {radius}), got {eta}")));
    }
    if m < MIN_NODES {
        return Err(Error::Domain(format!("at least {MIN_NODES} nodes required, got {m}")));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::Domain(format!("grading must be at least 1, got {grading}")));
    }
    let outer = radius - eta;
    let last = (m - 1) as f64;
    let mut nodes: Vec<f64> = (0..m)
        .map(|j| outer * (1.0 - (1.0 - j as f64 / last).powf(grading)))
        .collect();
    nodes[0] = 0.0;
    nodes[m - 1] = outer;
    let mut grid = Grid::from_nodes(nodes, radius)?;
    grid.eta = eta;
    grid.grading = grading;
    Ok(grid)
}

/// `D_n` for the radial domain of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedDomain {
    pub n: usize,
    /// `1/n`
    pub margin: f64,
    /// `R - 1/n`
    pub outer_radius: f64,
}

pub fn nested_subdomain(radius: f64, n: usize) -> Result<NestedDomain> {
    let margin = 1.0 / n as f64;
    if n == 0 || margin >= radius {
        return Err(Error::EmptyDomain { n, radius });
    }
    Ok(NestedDomain {
        n,
        margin,
        outer_radius: radius - margin,
    })
}

/// Smallest `n` with `R - 1/n ≥ R/2`, the default start of an exhaustion.
pub fn default_first_index(radius: f64) -> usize {
    (2.0 / radius).ceil().max(1.0) as usize
}
