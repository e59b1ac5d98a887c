//! Frontier grid on `[0, j*]` with piecewise-linear interpolation.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ModelParams;

/// Geometric node clustering below each accumulation point of the frontier.
///
/// Optimal frontiers approach their limit geometrically, so the value function
/// there is locally quadratic in the distance to the limit. A uniform grid
/// cannot represent it below one cell width and the interpolated policy stops
/// short of the limit. Clustering nodes at ratio `ratio` down to `floor`
/// pushes that artefact to distance `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub ratio: f64,
    pub floor: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            ratio: 0.99,
            floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierGrid {
    nodes: Vec<f64>,
    accumulation: Vec<f64>,
}

impl FrontierGrid {
    /// Uniform grid of `grid_size` nodes on `[0, j*]`, optionally refined
    /// below every accumulation point.
    pub fn build(params: &ModelParams, grid_size: usize, refinement: Option<Refinement>) -> Result<Self> {
        let accumulation = params.accumulation_points()?;
        let cap = *accumulation.last().expect("at least one accumulation point");
        let step = cap / (grid_size - 1) as f64;
        let mut nodes: Vec<f64> = (0..grid_size).map(|i| i as f64 * step).collect();
        *nodes.last_mut().unwrap() = cap;

        if let Some(Refinement { ratio, floor }) = refinement {
            let zone = step / (1.0 - ratio);
            let mut refined = Vec::new();
            let mut zones = Vec::new();
            for &r in &accumulation {
                let reach = zone.min(r);
                zones.push((r - reach, r));
                let mut x = reach;
                while x >= floor {
                    refined.push(r - x);
                    x *= ratio;
                }
                refined.push(r);
            }
            nodes.retain(|&l| !zones.iter().any(|&(lo, hi)| l > lo && l < hi));
            nodes.extend(refined);
            nodes.sort_by(f64::total_cmp);
            nodes.dedup_by(|a, b| *a - *b <= 1e-15);
            nodes.retain(|&l| l <= cap);
        } else {
            nodes.extend(accumulation.iter().copied());
            nodes.sort_by(f64::total_cmp);
            nodes.dedup_by(|a, b| *a - *b <= 1e-15);
        }
        // dedup may have dropped the exact cap in favour of a neighbour
        if *nodes.last().unwrap() != cap {
            nodes.pop();
            nodes.push(cap);
        }
        Ok(Self { nodes, accumulation })
    }

    /// Grid with cell `i` split into `pieces[i]` equal parts (0 and 1 leave
    /// it whole).
    pub fn subdivide(&self, pieces: &[usize]) -> Self {
        debug_assert_eq!(pieces.len(), self.nodes.len() - 1);
        let mut nodes = Vec::with_capacity(self.nodes.len() + pieces.iter().sum::<usize>());
        for (w, &m) in self.nodes.windows(2).zip(pieces) {
            nodes.push(w[0]);
            for j in 1..m {
                nodes.push(w[0] + (w[1] - w[0]) * j as f64 / m as f64);
            }
        }
        nodes.push(self.cap());
        Self {
            nodes,
            accumulation: self.accumulation.clone(),
        }
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

    /// Search cap `j*`, the last node.
    pub fn cap(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Points where `c(j)(1 − jp)` crosses `p·v` from below.
    pub fn accumulation_points(&self) -> &[f64] {
        &self.accumulation
    }

    /// Index `i` of the cell `[nodes[i], nodes[i+1]]` containing `l`.
    pub fn cell(&self, l: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x <= l);
        idx.saturating_sub(1).min(self.nodes.len() - 2)
    }

    pub fn cell_width(&self, l: f64) -> f64 {
        let i = self.cell(l);
        self.nodes[i + 1] - self.nodes[i]
    }

    /// True when `l` lies in a cell whose right end is an accumulation point,
    /// or at/after the cap. Below that scale the grid cannot resolve further
    /// search.
    pub fn in_terminal_cell(&self, l: f64) -> bool {
        if l >= self.cap() {
            return true;
        }
        let right = self.nodes[self.cell(l) + 1];
        self.accumulation.contains(&right)
    }

    /// Piecewise-linear interpolation of nodal `values` at `l`, clamped to the grid.
    pub fn interpolate(&self, values: &[f64], l: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        if l <= 0.0 {
            return values[0];
        }
        if l >= self.cap() {
            return values[values.len() - 1];
        }
        let i = self.cell(l);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let t = (l - x0) / (x1 - x0);
        values[i] + t * (values[i + 1] - values[i])
    }
}
