//! Fixture nets shared by the benchmarks.

use biquad_implicit::{ControlNet, Point3, QuadNet, TriangleNet};

fn pt(x: f64, y: f64, z: f64) -> Point3 {
    Point3 { x, y, z }
}

pub fn triangle() -> ControlNet {
    ControlNet::Triangle(
        TriangleNet::new(
            pt(1.0, 0.0, 0.0),
            pt(0.0, 1.0, 0.0),
            pt(0.0, 0.0, 1.0),
            pt(0.65, 0.65, 0.0),
            pt(0.65, 0.0, 0.65),
            pt(0.0, 0.65, 0.65),
        )
        .expect("valid net"),
    )
}

pub fn quad() -> ControlNet {
    let z = [[0.1, -0.2, 0.05], [0.3, 0.45, -0.1], [-0.15, 0.2, 0.35]];
    let mut grid = [[Point3::ORIGIN; 3]; 3];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, p) in row.iter_mut().enumerate() {
            let (u, v) = (i as f64 * 0.5, j as f64 * 0.5);
            *p = pt(u + 0.07 * v * v, v - 0.05 * u, z[i][j]);
        }
    }
    ControlNet::Quad(QuadNet::new(grid).expect("valid net"))
}

/// Deterministic query points around the unit cube.
pub fn queries(n: usize) -> Vec<Point3> {
    (0..n)
        .map(|i| {
            let s = i as f64 / n as f64;
            pt(1.3 * s - 0.2, (7.0 * s).fract() - 0.1, (13.0 * s).fract() * 1.2 - 0.3)
        })
        .collect()
}
