//! Integer lattices, cosets and co-line traversal on the `n`×`n` torus.
//!
//! A direction `(a, b)` is a primitive integer vector with `a` along
//! columns and `b` along rows. Co-lines wrap in both axes, so every line of
//! an `n`×`n` patch has exactly `n` cells.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    a: i32,
    b: i32,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, s, t)` with `s·a + t·b = g = gcd(a, b) ≥ 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1, 0);
    let (mut t0, mut t1) = (0, 1);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

impl Direction {
    /// Horizontal, 0°.
    pub const HORIZONTAL: Direction = Direction { a: 1, b: 0 };
    /// Vertical, 90°.
    pub const VERTICAL: Direction = Direction { a: 0, b: 1 };
    /// 45°: slope +1.
    pub const DIAGONAL: Direction = Direction { a: 1, b: 1 };
    /// −45°: slope −1.
    pub const ANTI_DIAGONAL: Direction = Direction { a: 1, b: -1 };

    pub fn new(a: i32, b: i32) -> Result<Self> {
        let d = Direction { a, b };
        if (a == 0 && b == 0) || gcd(a as i64, b as i64) != 1 {
            return Err(Error::UnsupportedDirection(d));
        }
        Ok(d)
    }

    pub fn a(self) -> i32 {
        self.a
    }

    pub fn b(self) -> i32 {
        self.b
    }

    /// True for the four directions the super-resolution pipeline accepts.
    pub fn is_supported(self) -> bool {
        matches!(
            self.canonical(),
            Direction::HORIZONTAL | Direction::VERTICAL | Direction::DIAGONAL | Direction::ANTI_DIAGONAL
        )
    }

    pub fn is_parallel(self, other: Direction) -> bool {
        self.a as i64 * other.b as i64 == self.b as i64 * other.a as i64
    }

    /// Degrees for the supported set, `a/b` otherwise.
    pub fn label(self) -> String {
        match self.canonical() {
            Direction::HORIZONTAL => "0".into(),
            Direction::VERTICAL => "90".into(),
            Direction::DIAGONAL => "45".into(),
            Direction::ANTI_DIAGONAL => "-45".into(),
            d => format!("{}/{}", d.b, d.a),
        }
    }

    /// Sign-normalized representative: first non-zero of `(a, b)` positive.
    fn canonical(self) -> Direction {
        if self.a < 0 || (self.a == 0 && self.b < 0) {
            Direction {
                a: -self.a,
                b: -self.b,
            }
        } else {
            self
        }
    }

    /// Traversal step as `(row, col)`, oriented so the first non-zero
    /// component is positive: rows run left to right, columns top to bottom,
    /// both diagonals top to bottom.
    pub fn step(self) -> (i64, i64) {
        let (r, c) = (self.b as i64, self.a as i64);
        if r < 0 || (r == 0 && c < 0) {
            (-r, -c)
        } else {
            (r, c)
        }
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Direction({}, {})", self.a, self.b)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Transform direction `d1` and alignment direction `d2` of an AWT(2,1) step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirectionPair {
    pub d1: Direction,
    pub d2: Direction,
}

impl DirectionPair {
    pub fn new(d1: Direction, d2: Direction) -> Result<Self> {
        if d1.is_parallel(d2) {
            return Err(Error::Precondition(format!(
                "direction pair ({d1}, {d2}) is degenerate"
            )));
        }
        Ok(Self { d1, d2 })
    }

    /// Generator matrix with rows `d1` and `d2`.
    pub fn generator(&self) -> [[i64; 2]; 2] {
        [
            [self.d1.a as i64, self.d1.b as i64],
            [self.d2.a as i64, self.d2.b as i64],
        ]
    }

    /// Transforms along `d1` and `d2` per level, `(n1, n2)`.
    pub fn anisotropy(&self) -> (u32, u32) {
        (2, 1)
    }

    pub fn label(&self) -> String {
        format!("({},{})", self.d1, self.d2)
    }

    /// Position in [`canonical_pairs`], if any.
    pub fn canonical_index(&self) -> Option<usize> {
        canonical_pairs().iter().position(|p| p == self)
    }

    /// Maps lattice coordinates to image cells on the `n`×`n` torus.
    ///
    /// Entry `v * n + u` holds the flat index of the cell reached from the
    /// origin by `u` steps along `d1` and `v` steps along `d2`. Row `v` of the
    /// lattice grid is therefore a co-line of `d1`, column `u` one of `d2`.
    pub fn lattice_map(&self, n: usize) -> Result<Vec<usize>> {
        let det = det(&self.generator());
        if det.abs() != 1 {
            return Err(Error::Precondition(format!(
                "pair {} spans {} cosets; only unimodular pairs are traversable",
                self.label(),
                det.abs()
            )));
        }
        let (r1, c1) = self.d1.step();
        let (r2, c2) = self.d2.step();
        let m = n as i64;
        let mut map = Vec::with_capacity(n * n);
        for v in 0..m {
            for u in 0..m {
                let r = (u * r1 + v * r2).rem_euclid(m);
                let c = (u * c1 + v * c2).rem_euclid(m);
                map.push((r * m + c) as usize);
            }
        }
        Ok(map)
    }
}

/// The five direction pairs searched per patch, in tie-break order:
/// (0°,90°), (0°,45°), (0°,−45°), (90°,45°), (90°,−45°).
pub fn canonical_pairs() -> [DirectionPair; 5] {
    use Direction as D;
    [
        DirectionPair { d1: D::HORIZONTAL, d2: D::VERTICAL },
        DirectionPair { d1: D::HORIZONTAL, d2: D::DIAGONAL },
        DirectionPair { d1: D::HORIZONTAL, d2: D::ANTI_DIAGONAL },
        DirectionPair { d1: D::VERTICAL, d2: D::DIAGONAL },
        DirectionPair { d1: D::VERTICAL, d2: D::ANTI_DIAGONAL },
    ]
}

pub fn det(g: &[[i64; 2]; 2]) -> i64 {
    g[0][0] * g[1][1] - g[0][1] * g[1][0]
}

/// Partition of `Z²` into cosets of the lattice spanned by the generator rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetDecomposition {
    pub generator: [[i64; 2]; 2],
    pub count: usize,
    /// One representative per coset, `(x, y)` ordered x-major.
    pub shifts: Vec<(i64, i64)>,
    // triangular basis {(h11, h12), (0, h22)} of the same lattice
    h11: i64,
    h12: i64,
    h22: i64,
}

impl CosetDecomposition {
    /// Index into `shifts` of the coset containing `p`.
    pub fn coset_of(&self, p: (i64, i64)) -> usize {
        let x0 = p.0.rem_euclid(self.h11);
        let m = (p.0 - x0) / self.h11;
        let y0 = (p.1 - m * self.h12).rem_euclid(self.h22);
        (x0 * self.h22 + y0) as usize
    }

    pub fn contains(&self, p: (i64, i64)) -> bool {
        self.coset_of(p) == 0
    }
}

pub fn coset_decomposition(g: [[i64; 2]; 2]) -> Result<CosetDecomposition> {
    let d = det(&g);
    if d == 0 {
        return Err(Error::SingularMatrix(g));
    }
    let [[a1, b1], [a2, b2]] = g;
    let (h11, s, t) = ext_gcd(a1, a2);
    let h12 = s * b1 + t * b2;
    let h22 = d.abs() / h11;
    let shifts = (0..h11)
        .flat_map(|x| (0..h22).map(move |y| (x, y)))
        .collect::<Vec<_>>();
    Ok(CosetDecomposition {
        generator: g,
        count: shifts.len(),
        shifts,
        h11,
        h12: h12.rem_euclid(h22),
        h22,
    })
}

/// Partitions the `n`×`n` torus into the `n` cyclic lines of direction `d`.
///
/// Cells are `(row, col)`. Line `k` is row `k` for 0°, column `k` for 90°,
/// `(i, k+i)` for 45° and `(i, k−i)` for −45°, with `i = 0..n` and columns
/// taken mod `n`.
pub fn colines(n: usize, d: Direction) -> Result<Vec<Vec<(usize, usize)>>> {
    if n == 0 {
        return Err(Error::Precondition("grid side must be positive".into()));
    }
    let line: fn(usize, usize, usize) -> (usize, usize) = match d.canonical() {
        Direction::HORIZONTAL => |_, k, i| (k, i),
        Direction::VERTICAL => |_, k, i| (i, k),
        Direction::DIAGONAL => |n, k, i| (i, (k + i) % n),
        Direction::ANTI_DIAGONAL => |n, k, i| (i, (k + n - i) % n),
        _ => return Err(Error::UnsupportedDirection(d)),
    };
    Ok((0..n)
        .map(|k| (0..n).map(|i| line(n, k, i)).collect())
        .collect())
}
