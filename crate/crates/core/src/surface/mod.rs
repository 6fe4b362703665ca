//! Sampling of the Yang-Mills energy on three-axis slices of state space
//! and extraction of its level sets.
//!
//! A projection on axes `(a1, a2, a3)` is a 3D slice: the three remaining
//! coordinates are held at the values of a reference state.

mod tables;

use std::collections::HashMap;
use std::io::{self, Write};

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrange::yang_mills_energy;
use crate::model::{check_dim, check_finite, VectorField, COMPARTMENTS};
use tables::{EDGE_TABLE, TRI_TABLE};

/// All 3-element subsets of `{1, .., 6}` (1-based), lexicographic.
pub fn enumerate_projections() -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(20);
    for a in 1..=6 {
        for b in a + 1..=6 {
            for c in b + 1..=6 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Uniform sampling of one axis: `count` nodes from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidProjection(format!(
                "axis range needs min < max, got [{min}, {max}]"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidProjection(format!(
                "axis needs at least 2 nodes, got {count}"
            )));
        }
        Ok(AxisRange { min, max, count })
    }

    /// Node coordinate. Written so that refining `count - 1` by a power of
    /// two reproduces shared nodes bit for bit.
    pub fn coord(&self, i: usize) -> f64 {
        self.min + ((self.max - self.min) * i as f64) / (self.count - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

/// A validated three-axis slice with its level value and band width.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec {
    axes: [usize; 3],
    reference: Vec<f64>,
    grid: [AxisRange; 3],
    rho: f64,
    tol: f64,
}

impl ProjectionSpec {
    /// `axes` are 1-based and distinct; `reference` supplies the fixed
    /// off-axis coordinates.
    pub fn new(
        axes: [usize; 3],
        reference: Vec<f64>,
        grid: [AxisRange; 3],
        rho: f64,
        tol: f64,
    ) -> Result<Self> {
        let n = reference.len();
        if n < 3 {
            return Err(Error::InvalidProjection(format!(
                "reference state has dimension {n}, need at least 3"
            )));
        }
        check_finite(&reference, "reference state")?;
        if axes.iter().any(|a| *a == 0 || *a > n) {
            return Err(Error::InvalidProjection(format!(
                "axes {axes:?} must lie in 1..={n}"
            )));
        }
        if axes[0] == axes[1] || axes[0] == axes[2] || axes[1] == axes[2] {
            return Err(Error::InvalidProjection(format!(
                "axes {axes:?} must be distinct"
            )));
        }
        for r in &grid {
            AxisRange::new(r.min, r.max, r.count)?;
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidProjection(format!(
                "level rho must be finite and >= 0, got {rho}"
            )));
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidProjection(format!(
                "band tolerance must be finite and >= 0, got {tol}"
            )));
        }
        Ok(ProjectionSpec {
            axes,
            reference,
            grid,
            rho,
            tol,
        })
    }

    pub fn axes(&self) -> [usize; 3] {
        self.axes
    }

    pub fn grid(&self) -> &[AxisRange; 3] {
        &self.grid
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// `(1-based index, value)` of the coordinates held fixed.
    pub fn fixed_values(&self) -> Vec<(usize, f64)> {
        (1..=self.reference.len())
            .filter(|i| !self.axes.contains(i))
            .map(|i| (i, self.reference[i - 1]))
            .collect()
    }

    /// Full state at grid node `(i, j, k)`.
    pub fn point(&self, node: [usize; 3]) -> Vec<f64> {
        let mut x = self.reference.clone();
        for d in 0..3 {
            x[self.axes[d] - 1] = self.grid[d].coord(node[d]);
        }
        x
    }
}

/// Scalar values on a regular 3D grid, indexed `(i * n2 + j) * n3 + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    ranges: [AxisRange; 3],
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn from_fn(ranges: [AxisRange; 3], f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut values = Vec::with_capacity(ranges.iter().map(|r| r.count).product());
        for i in 0..ranges[0].count {
            for j in 0..ranges[1].count {
                for k in 0..ranges[2].count {
                    values.push(f([ranges[0].coord(i), ranges[1].coord(j), ranges[2].coord(k)]));
                }
            }
        }
        ScalarGrid { ranges, values }
    }

    pub fn ranges(&self) -> &[AxisRange; 3] {
        &self.ranges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.ranges[0].count, self.ranges[1].count, self.ranges[2].count]
    }

    fn index(&self, node: [usize; 3]) -> usize {
        let [_, n2, n3] = self.counts();
        (node[0] * n2 + node[1]) * n3 + node[2]
    }

    pub fn value(&self, node: [usize; 3]) -> f64 {
        self.values[self.index(node)]
    }

    pub fn coords(&self, node: [usize; 3]) -> [f64; 3] {
        [
            self.ranges[0].coord(node[0]),
            self.ranges[1].coord(node[1]),
            self.ranges[2].coord(node[2]),
        ]
    }

    /// `(min, max)` over all nodes.
    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
    }

    fn node_of(&self, idx: usize) -> [usize; 3] {
        let [_, n2, n3] = self.counts();
        [idx / (n2 * n3), (idx / n3) % n2, idx % n3]
    }
}

/// Evaluates EYM at every node of the slice, in parallel. The result does
/// not depend on the evaluation order.
pub fn sample_energy_grid<F: VectorField>(field: &F, spec: &ProjectionSpec) -> Result<ScalarGrid> {
    check_dim(field.dim(), spec.reference())?;
    let ranges = spec.grid;
    let total: usize = ranges.iter().map(|r| r.count).product();
    let shape = ScalarGrid {
        ranges,
        values: Vec::new(),
    };
    let results: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let node = shape.node_of(idx);
            let x = spec.point(node);
            yang_mills_energy(field, &x).map_err(|e| match e {
                Error::DegeneratePopulation { total } => Error::DegenerateGridNode { node, total },
                other => other,
            })
        })
        .collect();
    // Report the first failure in index order so errors are deterministic.
    let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("EYM at grid node {:?}", shape.node_of(idx)),
        });
    }
    Ok(ScalarGrid { ranges, values })
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Undirected edges not shared by exactly two triangles.
    pub fn non_manifold_edges(&self) -> usize {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.values().filter(|c| **c != 2).count()
    }

    /// Signed enclosed volume (positive for outward-facing closed meshes).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    pub fn write_obj<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Marching cubes on the level set `value = rho`. Vertices are shared
/// between neighbouring cells and every triangle faces the direction of
/// increasing value.
pub fn extract_isosurface(grid: &ScalarGrid, rho: f64) -> Mesh {
    let (lo, hi) = grid.value_range();
    if !(rho >= lo && rho <= hi) {
        warn!("level {rho} outside sampled range [{lo}, {hi}]; mesh is empty");
        return Mesh::default();
    }
    let [n1, n2, n3] = grid.counts();
    let h = [
        grid.ranges[0].spacing(),
        grid.ranges[1].spacing(),
        grid.ranges[2].spacing(),
    ];
    let mut mesh = Mesh::default();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();

    for i in 0..n1 - 1 {
        for j in 0..n2 - 1 {
            for k in 0..n3 - 1 {
                let nodes = CORNERS.map(|c| [i + c[0], j + c[1], k + c[2]]);
                let vals = nodes.map(|n| grid.value(n));
                let mut case = 0usize;
                for (c, v) in vals.iter().enumerate() {
                    if *v < rho {
                        case |= 1 << c;
                    }
                }
                let flags = EDGE_TABLE[case];
                if flags == 0 {
                    continue;
                }
                let mut local = [usize::MAX; 12];
                for (e, [a, b]) in EDGES.iter().enumerate() {
                    if flags & (1 << e) == 0 {
                        continue;
                    }
                    let (ga, gb) = (grid.index(nodes[*a]), grid.index(nodes[*b]));
                    let key = (ga.min(gb), ga.max(gb));
                    local[e] = *edge_vertex.entry(key).or_insert_with(|| {
                        let (va, vb) = (vals[*a], vals[*b]);
                        let t = if (vb - va).abs() > 0.0 {
                            ((rho - va) / (vb - va)).clamp(0.0, 1.0)
                        } else {
                            0.5
                        };
                        let pa = grid.coords(nodes[*a]);
                        let pb = grid.coords(nodes[*b]);
                        mesh.vertices.push([
                            pa[0] + t * (pb[0] - pa[0]),
                            pa[1] + t * (pb[1] - pa[1]),
                            pa[2] + t * (pb[2] - pa[2]),
                        ]);
                        mesh.vertices.len() - 1
                    });
                }

                // cell-averaged gradient
                let g = [
                    (vals[1] - vals[0] + vals[2] - vals[3] + vals[5] - vals[4] + vals[6] - vals[7])
                        / (4.0 * h[0]),
                    (vals[3] - vals[0] + vals[2] - vals[1] + vals[7] - vals[4] + vals[6] - vals[5])
                        / (4.0 * h[1]),
                    (vals[4] - vals[0] + vals[5] - vals[1] + vals[6] - vals[2] + vals[7] - vals[3])
                        / (4.0 * h[2]),
                ];
                for tri in TRI_TABLE[case].chunks(3) {
                    if tri[0] < 0 {
                        break;
                    }
                    let mut t = [
                        local[tri[0] as usize],
                        local[tri[1] as usize],
                        local[tri[2] as usize],
                    ];
                    let [a, b, c] = t.map(|v| mesh.vertices[v]);
                    if dot(cross(sub(b, a), sub(c, a)), g) < 0.0 {
                        t.swap(1, 2);
                    }
                    mesh.triangles.push(t);
                }
            }
        }
    }
    mesh
}

/// A grid node inside the band `|value - rho| <= tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPoint {
    pub coords: [f64; 3],
    pub value: f64,
}

pub fn band_point_cloud(grid: &ScalarGrid, rho: f64, tol: f64) -> Result<Vec<BandPoint>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidProjection(format!(
            "band tolerance must be >= 0, got {tol}"
        )));
    }
    Ok(grid
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| (**v - rho).abs() <= tol)
        .map(|(idx, v)| BandPoint {
            coords: grid.coords(grid.node_of(idx)),
            value: *v,
        })
        .collect())
}

pub fn write_point_cloud_csv<W: Write>(out: &mut W, points: &[BandPoint]) -> io::Result<()> {
    writeln!(out, "a1,a2,a3,EYM")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            crate::ode::fmt_f64(p.coords[0]),
            crate::ode::fmt_f64(p.coords[1]),
            crate::ode::fmt_f64(p.coords[2]),
            crate::ode::fmt_f64(p.value)
        )?;
    }
    Ok(())
}

/// Metadata written next to each exported mesh or point cloud.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub axes: [usize; 3],
    pub axis_names: [String; 3],
    pub fixed: serde_json::Map<String, serde_json::Value>,
    pub rho: f64,
    pub grid: [AxisRange; 3],
    pub projection: &'static str,
    pub mode: &'static str,
    pub tol: f64,
    pub value_range: [f64; 2],
    pub vertices: usize,
    pub triangles: usize,
    pub points: usize,
}

fn coordinate_name(dim: usize, i: usize) -> String {
    if dim == COMPARTMENTS.len() {
        COMPARTMENTS[i - 1].to_string()
    } else {
        format!("x{i}")
    }
}

impl Sidecar {
    pub fn new(spec: &ProjectionSpec, grid: &ScalarGrid, mode: &'static str) -> Self {
        let dim = spec.reference().len();
        let fixed = spec
            .fixed_values()
            .into_iter()
            .map(|(i, v)| (coordinate_name(dim, i), serde_json::Value::from(v)))
            .collect();
        let (lo, hi) = grid.value_range();
        Sidecar {
            axes: spec.axes(),
            axis_names: spec.axes().map(|a| coordinate_name(dim, a)),
            fixed,
            rho: spec.rho(),
            grid: spec.grid,
            projection: "slice",
            mode,
            tol: spec.tol(),
            value_range: [lo, hi],
            vertices: 0,
            triangles: 0,
            points: 0,
        }
    }
}
