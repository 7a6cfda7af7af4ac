//! Lagrange shape functions on the reference square `[0, 1]^2`.
//!
//! Q1 nodes are the vertices counterclockwise from the origin. Q2 nodes are
//! the four vertices, the midpoints of the bottom, right, top and left edges,
//! then the center.

/// Reference coordinates of the Q1 nodes.
pub const Q1_NODES: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// Reference coordinates of the Q2 nodes.
pub const Q2_NODES: [[f64; 2]; 9] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [1.0, 1.0],
    [0.0, 1.0],
    [0.5, 0.0],
    [1.0, 0.5],
    [0.5, 1.0],
    [0.0, 0.5],
    [0.5, 0.5],
];

/// 1D index (0, 1, 2 for t = 0, 1/2, 1) of each Q2 node per direction.
const Q2_INDEX: [[usize; 2]; 9] =
    [[0, 0], [2, 0], [2, 2], [0, 2], [1, 0], [2, 1], [1, 2], [0, 1], [1, 1]];

const Q1_INDEX: [[usize; 2]; 4] = [[0, 0], [1, 0], [1, 1], [0, 1]];

fn lin(t: f64) -> ([f64; 2], [f64; 2]) {
    ([1.0 - t, t], [-1.0, 1.0])
}

/// Quadratic Lagrange basis on nodes 0, 1/2, 1 and its derivative.
pub fn quad_1d(t: f64) -> ([f64; 3], [f64; 3]) {
    (
        [2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)],
        [4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0],
    )
}

pub fn q1_values(p: [f64; 2]) -> [f64; 4] {
    let (lx, _) = lin(p[0]);
    let (ly, _) = lin(p[1]);
    Q1_INDEX.map(|[i, j]| lx[i] * ly[j])
}

/// Gradients with respect to the reference coordinates.
pub fn q1_grads(p: [f64; 2]) -> [[f64; 2]; 4] {
    let (lx, dx) = lin(p[0]);
    let (ly, dy) = lin(p[1]);
    Q1_INDEX.map(|[i, j]| [dx[i] * ly[j], lx[i] * dy[j]])
}

pub fn q2_values(p: [f64; 2]) -> [f64; 9] {
    let (lx, _) = quad_1d(p[0]);
    let (ly, _) = quad_1d(p[1]);
    Q2_INDEX.map(|[i, j]| lx[i] * ly[j])
}

pub fn q2_grads(p: [f64; 2]) -> [[f64; 2]; 9] {
    let (lx, dx) = quad_1d(p[0]);
    let (ly, dy) = quad_1d(p[1]);
    Q2_INDEX.map(|[i, j]| [dx[i] * ly[j], lx[i] * dy[j]])
}

/// Values and physical gradients of a scalar Lagrange element of the given
/// degree at reference point `p` on a cell with edge lengths `h`.
pub fn eval(degree: usize, p: [f64; 2], h: [f64; 2], values: &mut Vec<f64>, grads: &mut Vec<[f64; 2]>) {
    values.clear();
    grads.clear();
    match degree {
        1 => {
            values.extend(q1_values(p));
            grads.extend(q1_grads(p).iter().map(|g| [g[0] / h[0], g[1] / h[1]]));
        }
        2 => {
            values.extend(q2_values(p));
            grads.extend(q2_grads(p).iter().map(|g| [g[0] / h[0], g[1] / h[1]]));
        }
        _ => panic!("unsupported element degree {degree}"),
    }
}

pub fn nodes(degree: usize) -> &'static [[f64; 2]] {
    match degree {
        1 => &Q1_NODES,
        2 => &Q2_NODES,
        _ => panic!("unsupported element degree {degree}"),
    }
}
