//! Householder kernels.
//!
//! A factorization overwrites its input: `R` lands on and above the diagonal
//! of the leading `n x n` block and the reflector vectors `v_j` are stored
//! below their pivots, with the unit pivot entry implicit. The [`Shape`] of
//! the input tells every kernel where a reflector can be nonzero, so stacked
//! triangles and triangle-on-rectangle inputs are factored without touching
//! their structural zeros.
//!
//! Reflectors follow the LAPACK convention `H = I - tau v vᵀ`, `v_0 = 1`,
//! `H x = beta e_0` with `beta = -sign(x_0) ‖x‖` and `sign(0) = +1`. A column
//! that is already reduced with a nonnegative pivot gets `tau = 0`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::matrix::Matrix;

/// Zero structure of a matrix handed to a QR kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Dense,
    /// `q` upper triangles of order `n` stacked vertically (`qn x n`).
    StackedTriangles {
        q: usize,
    },
    /// An `n x n` upper triangle on top of a full `rect_rows x n` block.
    TriangleOnRect {
        rect_rows: usize,
    },
}

impl Shape {
    fn check(&self, m: usize, n: usize) -> Result<()> {
        match *self {
            Shape::Dense => Ok(()),
            Shape::StackedTriangles { q } if q * n == m => Ok(()),
            Shape::TriangleOnRect { rect_rows } if n + rect_rows == m => Ok(()),
            s => Err(Error::dim(format!("{s:?} does not fit a {m}x{n} matrix"))),
        }
    }

    /// Rows (other than the pivot `j`) where reflector `j` may be nonzero.
    pub fn tail(&self, j: usize, m: usize, n: usize) -> Vec<Range<usize>> {
        match *self {
            Shape::Dense => vec![j + 1..m],
            Shape::StackedTriangles { q } => (1..q).map(|t| t * n..t * n + j + 1).collect(),
            Shape::TriangleOnRect { .. } => vec![n..m],
        }
    }

    fn in_tail(&self, r: usize, j: usize, n: usize) -> bool {
        match *self {
            Shape::Dense => r > j,
            Shape::StackedTriangles { .. } => r >= n && r % n <= j,
            Shape::TriangleOnRect { .. } => r >= n,
        }
    }
}

/// One Householder reflector in explicit form.
#[derive(Clone, Debug, PartialEq)]
pub struct Reflector {
    pub v: Vec<f64>,
    pub tau: f64,
    pub beta: f64,
}

/// Reflector mapping `x` to `(beta, 0, ..., 0)`. A zero vector yields the
/// identity (`tau = 0, beta = 0`).
pub fn house_gen(x: &[f64]) -> Reflector {
    if x.is_empty() {
        return Reflector {
            v: Vec::new(),
            tau: 0.0,
            beta: 0.0,
        };
    }
    let mut v = x.to_vec();
    let (tau, beta) = house_gen_in_place(&mut v, &mut FlopCounter::default());
    v[0] = 1.0;
    Reflector { v, tau, beta }
}

/// On return `x[0] = beta` and `x[1..]` holds the tail of `v`.
fn house_gen_in_place(x: &mut [f64], flops: &mut FlopCounter) -> (f64, f64) {
    let alpha = x[0];
    let tail = &mut x[1..];
    let sumsq: f64 = tail.iter().map(|v| v * v).sum();
    flops.add(2 * tail.len() as u64);
    if sumsq == 0.0 {
        if alpha >= 0.0 {
            return (0.0, alpha);
        }
        // Pure sign flip: v = e_0, tau = 2.
        x[0] = -alpha;
        return (2.0, -alpha);
    }
    let norm = (alpha * alpha + sumsq).sqrt();
    flops.add(2);
    flops.div(1);
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scal = 1.0 / (alpha - beta);
    flops.add(2);
    flops.div(2);
    for v in tail.iter_mut() {
        *v *= scal;
    }
    flops.add(tail.len() as u64);
    x[0] = beta;
    (tau, beta)
}

/// `cc := (I - tau v vᵀ) cc` where `v` is stored in `y` (pivot `j`, rows `tail`).
#[inline]
fn reflect(
    y: &[f64],
    tail: &[Range<usize>],
    j: usize,
    tau: f64,
    cc: &mut [f64],
    flops: &mut FlopCounter,
) {
    let mut s = cc[j];
    let mut len = 0u64;
    for r in tail {
        for i in r.clone() {
            s += y[i] * cc[i];
        }
        len += r.len() as u64;
    }
    s *= tau;
    cc[j] -= s;
    for r in tail {
        for i in r.clone() {
            cc[i] -= y[i] * s;
        }
    }
    flops.add(4 * len + 2);
}

/// Read-only view of reflectors `offset..offset + y.cols()` of a factor.
struct Reflectors<'a> {
    y: &'a Matrix,
    offset: usize,
    shape: Shape,
    m: usize,
    n: usize,
}

impl Reflectors<'_> {
    fn col(&self, j: usize) -> &[f64] {
        self.y.col(j - self.offset)
    }

    fn tail(&self, j: usize) -> Vec<Range<usize>> {
        self.shape.tail(j, self.m, self.n)
    }

    /// Entry `(r, j)` of the explicit reflector matrix.
    fn at(&self, r: usize, j: usize) -> f64 {
        if r == j {
            1.0
        } else if self.shape.in_tail(r, j, self.n) {
            self.col(j)[r]
        } else {
            0.0
        }
    }
}

/// Compact-WY `T` for reflectors `j0..j0+k`: `H_{j0} ⋯ H_{j0+k-1} = I - Y T Yᵀ`.
fn form_t_block(refl: &Reflectors<'_>, j0: usize, tau: &[f64], flops: &mut FlopCounter) -> Matrix {
    let k = tau.len();
    let mut t = Matrix::zeros(k, k);
    let mut z = vec![0.0; k];
    for jj in 0..k {
        let j = j0 + jj;
        let tj = tau[jj];
        if tj == 0.0 {
            continue;
        }
        let tail = refl.tail(j);
        let yj = refl.col(j);
        for ii in 0..jj {
            let i = j0 + ii;
            let mut s = refl.at(j, i);
            for r in &tail {
                for row in r.clone() {
                    s += refl.at(row, i) * yj[row];
                }
                flops.add(2 * r.len() as u64);
            }
            z[ii] = -tj * s;
        }
        flops.add(jj as u64);
        for ii in 0..jj {
            let mut s = 0.0;
            for l in ii..jj {
                s += t[(ii, l)] * z[l];
            }
            flops.add(2 * (jj - ii) as u64);
            t[(ii, jj)] = s;
        }
        t[(jj, jj)] = tj;
    }
    t
}

/// Applies `I - Y op(T) Yᵀ` (reflectors `j0..j0+k`) to columns `cols` of `c`.
/// `transpose` selects `op(T) = Tᵀ`, i.e. the action of `Qᵀ`.
fn apply_block(
    refl: &Reflectors<'_>,
    j0: usize,
    t: &Matrix,
    transpose: bool,
    c: &mut Matrix,
    cols: Range<usize>,
    flops: &mut FlopCounter,
) {
    let k = t.rows();
    let tails: Vec<_> = (j0..j0 + k).map(|j| refl.tail(j)).collect();
    let tail_len: u64 = tails.iter().flatten().map(|r| r.len() as u64).sum();
    let mut w = vec![0.0; k];
    let ncols = cols.len() as u64;
    for col in cols {
        let cc = c.col_mut(col);
        for (jj, tail) in tails.iter().enumerate() {
            let j = j0 + jj;
            let y = refl.col(j);
            let mut s = cc[j];
            for r in tail {
                for i in r.clone() {
                    s += y[i] * cc[i];
                }
            }
            w[jj] = s;
        }
        if transpose {
            for i in (0..k).rev() {
                let mut s = t[(i, i)] * w[i];
                for l in 0..i {
                    s += t[(l, i)] * w[l];
                }
                w[i] = s;
            }
        } else {
            for i in 0..k {
                let mut s = t[(i, i)] * w[i];
                for l in i + 1..k {
                    s += t[(i, l)] * w[l];
                }
                w[i] = s;
            }
        }
        for (jj, tail) in tails.iter().enumerate() {
            let wj = w[jj];
            if wj == 0.0 {
                continue;
            }
            let j = j0 + jj;
            let y = refl.col(j);
            cc[j] -= wj;
            for r in tail {
                for i in r.clone() {
                    cc[i] -= y[i] * wj;
                }
            }
        }
    }
    // Yᵀc, op(T) w, c -= Y w
    flops.add(ncols * (2 * tail_len + (k * k) as u64 + 2 * tail_len + k as u64));
}

/// Stored compact-WY factor for reflectors `start..start + t.rows()`.
#[derive(Clone, Debug, PartialEq)]
pub struct TBlock {
    pub start: usize,
    pub t: Matrix,
}

/// Implicit `Q` of a QR factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct HouseholderFactor {
    packed: Matrix,
    tau: Vec<f64>,
    t_blocks: Vec<TBlock>,
    shape: Shape,
}

/// Output of every QR kernel.
#[derive(Clone, Debug)]
pub struct QrFactorization {
    pub factor: HouseholderFactor,
    pub r: Matrix,
    pub flops: FlopCounter,
}

/// How a QR kernel organizes its column loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QrStrategy {
    Unblocked,
    /// Panels of the given width, trailing update through compact WY.
    Blocked(usize),
    /// Recursive column splitting down to the given width.
    Recursive(usize),
}

impl HouseholderFactor {
    /// Reassembles a factor from its packed storage (reflector tails below
    /// the pivots) and multipliers.
    pub fn from_parts(packed: Matrix, tau: Vec<f64>, shape: Shape) -> Result<Self> {
        let (m, n) = packed.shape();
        shape.check(m, n)?;
        if m < n || tau.len() != n {
            return Err(Error::dim(format!(
                "factor of a {m}x{n} matrix needs m >= n and {n} multipliers, got {}",
                tau.len()
            )));
        }
        Ok(HouseholderFactor {
            packed,
            tau,
            t_blocks: Vec::new(),
            shape,
        })
    }

    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Packed storage: `R` in the upper triangle, reflector tails below.
    pub fn packed(&self) -> &Matrix {
        &self.packed
    }

    pub fn t_blocks(&self) -> &[TBlock] {
        &self.t_blocks
    }

    fn reflectors(&self) -> Reflectors<'_> {
        Reflectors {
            y: &self.packed,
            offset: 0,
            shape: self.shape,
            m: self.rows(),
            n: self.cols(),
        }
    }

    pub fn r(&self) -> Matrix {
        self.packed.upper_triangle()
    }

    /// Explicit reflector matrix with unit pivots and structural zeros.
    pub fn y(&self) -> Matrix {
        let refl = self.reflectors();
        Matrix::from_fn(self.rows(), self.cols(), |i, j| refl.at(i, j))
    }

    /// Full `n x n` compact-WY factor, formed on demand.
    pub fn t(&self) -> Matrix {
        self.t_counted(&mut FlopCounter::default())
    }

    pub fn t_counted(&self, flops: &mut FlopCounter) -> Matrix {
        match self.t_blocks.as_slice() {
            [b] if b.start == 0 && b.t.rows() == self.cols() => b.t.clone(),
            _ => form_t_block(&self.reflectors(), 0, &self.tau, flops),
        }
    }

    /// Stores the full `T` so later applications use level-3 updates.
    pub fn with_t(mut self) -> Self {
        let t = self.t();
        self.t_blocks = vec![TBlock { start: 0, t }];
        self
    }

    pub fn with_t_counted(mut self, flops: &mut FlopCounter) -> Self {
        let t = self.t_counted(flops);
        self.t_blocks = vec![TBlock { start: 0, t }];
        self
    }

    /// Drops stored `T` blocks; applications fall back to one reflector at a time.
    pub fn without_t(mut self) -> Self {
        self.t_blocks.clear();
        self
    }

    fn check_rows(&self, c: &Matrix) -> Result<()> {
        if c.rows() != self.rows() {
            return Err(Error::dim(format!(
                "factor has {} rows, operand has {}",
                self.rows(),
                c.rows()
            )));
        }
        Ok(())
    }

    /// `c := Qᵀ c`.
    pub fn apply_qt_in_place(&self, c: &mut Matrix, flops: &mut FlopCounter) -> Result<()> {
        self.check_rows(c)?;
        let refl = self.reflectors();
        let cols = 0..c.cols();
        if self.t_blocks.is_empty() {
            for j in 0..self.cols() {
                if self.tau[j] != 0.0 {
                    let tail = refl.tail(j);
                    for col in cols.clone() {
                        reflect(refl.col(j), &tail, j, self.tau[j], c.col_mut(col), flops);
                    }
                }
            }
        } else {
            for b in &self.t_blocks {
                apply_block(&refl, b.start, &b.t, true, c, cols.clone(), flops);
            }
        }
        Ok(())
    }

    /// `c := Q c`.
    pub fn apply_q_in_place(&self, c: &mut Matrix, flops: &mut FlopCounter) -> Result<()> {
        self.check_rows(c)?;
        let refl = self.reflectors();
        let cols = 0..c.cols();
        if self.t_blocks.is_empty() {
            for j in (0..self.cols()).rev() {
                if self.tau[j] != 0.0 {
                    let tail = refl.tail(j);
                    for col in cols.clone() {
                        reflect(refl.col(j), &tail, j, self.tau[j], c.col_mut(col), flops);
                    }
                }
            }
        } else {
            for b in self.t_blocks.iter().rev() {
                apply_block(&refl, b.start, &b.t, false, c, cols.clone(), flops);
            }
        }
        Ok(())
    }

    pub fn apply_qt(&self, c: &Matrix) -> Result<Matrix> {
        let mut out = c.clone();
        self.apply_qt_in_place(&mut out, &mut FlopCounter::default())?;
        Ok(out)
    }

    pub fn apply_q(&self, c: &Matrix) -> Result<Matrix> {
        let mut out = c.clone();
        self.apply_q_in_place(&mut out, &mut FlopCounter::default())?;
        Ok(out)
    }

    /// Explicit `Q`: `m x n` with orthonormal columns when `thin`, else `m x m`.
    pub fn explicit_q(&self, thin: bool) -> Matrix {
        let m = self.rows();
        let mut q = Matrix::eye(m, if thin { self.cols() } else { m });
        self.apply_q_in_place(&mut q, &mut FlopCounter::default())
            .expect("row count matches by construction");
        q
    }

    /// Reflector payload for messages: for each column, the entries of its
    /// tail in storage order, followed by the `n` multipliers.
    pub fn pack_reflectors(&self) -> Vec<f64> {
        let (m, n) = (self.rows(), self.cols());
        let mut out = Vec::new();
        for j in 0..n {
            for r in self.shape.tail(j, m, n) {
                out.extend_from_slice(&self.packed.col(j)[r]);
            }
        }
        out.extend_from_slice(&self.tau);
        out
    }

    /// Number of words [`HouseholderFactor::pack_reflectors`] produces.
    pub fn packed_len(shape: Shape, m: usize, n: usize) -> usize {
        (0..n)
            .map(|j| shape.tail(j, m, n).iter().map(|r| r.len()).sum::<usize>())
            .sum::<usize>()
            + n
    }

    /// Inverse of [`HouseholderFactor::pack_reflectors`]. Entries that would
    /// hold `R` are zero in the result.
    pub fn unpack_reflectors(shape: Shape, m: usize, n: usize, words: &[f64]) -> Result<Self> {
        shape.check(m, n)?;
        let need = Self::packed_len(shape, m, n);
        if words.len() != need {
            return Err(Error::dim(format!(
                "reflector payload needs {need} words, got {}",
                words.len()
            )));
        }
        let mut packed = Matrix::zeros(m, n);
        let mut at = 0;
        for j in 0..n {
            for r in shape.tail(j, m, n) {
                let len = r.len();
                packed.col_mut(j)[r].copy_from_slice(&words[at..at + len]);
                at += len;
            }
        }
        Self::from_parts(packed, words[at..].to_vec(), shape)
    }
}

/// Unblocked Householder QR of columns `cols`, updating only inside `cols`.
fn factor_panel(
    a: &mut Matrix,
    shape: Shape,
    cols: Range<usize>,
    tau: &mut [f64],
    flops: &mut FlopCounter,
) {
    let (m, n) = a.shape();
    let mut x = Vec::with_capacity(m);
    for j in cols.clone() {
        let tail = shape.tail(j, m, n);
        {
            let col = a.col(j);
            x.clear();
            x.push(col[j]);
            for r in &tail {
                x.extend_from_slice(&col[r.clone()]);
            }
        }
        let (t, beta) = house_gen_in_place(&mut x, flops);
        {
            let col = a.col_mut(j);
            col[j] = beta;
            let mut at = 1;
            for r in &tail {
                col[r.clone()].copy_from_slice(&x[at..at + r.len()]);
                at += r.len();
            }
        }
        tau[j] = t;
        if t != 0.0 {
            for c in j + 1..cols.end {
                let (y, cc) = a.col_pair_mut(j, c);
                reflect(y, &tail, j, t, cc, flops);
            }
        }
    }
}

/// Applies reflectors `cols` one at a time to columns `target` of `a`.
fn update_by_reflectors(
    a: &mut Matrix,
    shape: Shape,
    cols: Range<usize>,
    tau: &[f64],
    target: Range<usize>,
    flops: &mut FlopCounter,
) {
    let (m, n) = a.shape();
    for j in cols {
        if tau[j] == 0.0 {
            continue;
        }
        let tail = shape.tail(j, m, n);
        for c in target.clone() {
            let (y, cc) = a.col_pair_mut(j, c);
            reflect(y, &tail, j, tau[j], cc, flops);
        }
    }
}

fn recursive_panel(
    a: &mut Matrix,
    shape: Shape,
    cols: Range<usize>,
    min_width: usize,
    tau: &mut [f64],
    flops: &mut FlopCounter,
) -> Matrix {
    let (m, n) = a.shape();
    let k = cols.len();
    if k <= min_width.max(1) {
        factor_panel(a, shape, cols.clone(), tau, flops);
        let panel = a.submatrix(0..m, cols.clone());
        let refl = Reflectors {
            y: &panel,
            offset: cols.start,
            shape,
            m,
            n,
        };
        return form_t_block(&refl, cols.start, &tau[cols], flops);
    }
    let k1 = k / 2;
    let left = cols.start..cols.start + k1;
    let right = cols.start + k1..cols.end;
    let t1 = recursive_panel(a, shape, left.clone(), min_width, tau, flops);
    let left_y = a.submatrix(0..m, left.clone());
    let refl1 = Reflectors {
        y: &left_y,
        offset: left.start,
        shape,
        m,
        n,
    };
    apply_block(&refl1, left.start, &t1, true, a, right.clone(), flops);
    let t2 = recursive_panel(a, shape, right.clone(), min_width, tau, flops);
    let all_y = a.submatrix(0..m, cols.clone());
    let refl = Reflectors {
        y: &all_y,
        offset: cols.start,
        shape,
        m,
        n,
    };
    // T12 = -T1 (Y1ᵀ Y2) T2
    let k2 = right.len();
    let mut yty = Matrix::zeros(k1, k2);
    for jj in 0..k2 {
        let j = right.start + jj;
        let tail = refl.tail(j);
        for ii in 0..k1 {
            let i = left.start + ii;
            let mut s = refl.at(j, i);
            for r in &tail {
                for row in r.clone() {
                    s += refl.at(row, i) * refl.col(j)[row];
                }
            }
            yty[(ii, jj)] = s;
        }
        flops.add((k1 * 2 * tail.iter().map(|r| r.len()).sum::<usize>()) as u64);
    }
    let t12 = t1
        .matmul(&yty)
        .and_then(|x| x.matmul(&t2))
        .expect("conformant by construction");
    flops.add((2 * k1 * k1 * k2 + 2 * k1 * k2 * k2) as u64);
    let mut t = Matrix::zeros(k, k);
    t.set_submatrix(0, 0, &t1);
    t.set_submatrix(k1, k1, &t2);
    for jj in 0..k2 {
        for ii in 0..k1 {
            t[(ii, k1 + jj)] = -t12[(ii, jj)];
        }
    }
    t
}

/// Factors `a` (consumed) with the given zero structure and strategy.
pub fn qr_with(mut a: Matrix, shape: Shape, strategy: QrStrategy) -> Result<QrFactorization> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::dim(format!("QR needs m >= n, got {m}x{n}")));
    }
    shape.check(m, n)?;
    let mut tau = vec![0.0; n];
    let mut flops = FlopCounter::default();
    let mut t_blocks = Vec::new();
    match strategy {
        QrStrategy::Unblocked => factor_panel(&mut a, shape, 0..n, &mut tau, &mut flops),
        QrStrategy::Blocked(nb) => {
            if nb == 0 || (nb > n && n > 0) {
                return Err(Error::dim(format!("block width {nb} outside 1..={n}")));
            }
            let mut j0 = 0;
            while j0 < n {
                let j1 = (j0 + nb).min(n);
                factor_panel(&mut a, shape, j0..j1, &mut tau, &mut flops);
                let panel = a.submatrix(0..m, j0..j1);
                let refl = Reflectors {
                    y: &panel,
                    offset: j0,
                    shape,
                    m,
                    n,
                };
                let t = form_t_block(&refl, j0, &tau[j0..j1], &mut flops);
                if j1 < n {
                    if j1 - j0 == 1 {
                        update_by_reflectors(&mut a, shape, j0..j1, &tau, j1..n, &mut flops);
                    } else {
                        apply_block(&refl, j0, &t, true, &mut a, j1..n, &mut flops);
                    }
                }
                t_blocks.push(TBlock { start: j0, t });
                j0 = j1;
            }
        }
        QrStrategy::Recursive(min_width) => {
            if n > 0 {
                let t = recursive_panel(&mut a, shape, 0..n, min_width, &mut tau, &mut flops);
                t_blocks.push(TBlock { start: 0, t });
            }
        }
    }
    let factor = HouseholderFactor {
        packed: a,
        tau,
        t_blocks,
        shape,
    };
    let r = factor.r();
    Ok(QrFactorization { factor, r, flops })
}

pub fn qr_unblocked(a: &Matrix) -> Result<QrFactorization> {
    qr_with(a.clone(), Shape::Dense, QrStrategy::Unblocked)
}

pub fn qr_blocked(a: &Matrix, nb: usize) -> Result<QrFactorization> {
    qr_with(a.clone(), Shape::Dense, QrStrategy::Blocked(nb))
}

pub fn qr_recursive(a: &Matrix, min_width: usize) -> Result<QrFactorization> {
    qr_with(a.clone(), Shape::Dense, QrStrategy::Recursive(min_width))
}

fn check_upper_triangular(r: &Matrix, n: usize, what: &str) -> Result<()> {
    if r.shape() != (n, n) {
        return Err(Error::dim(format!(
            "{what} must be {n}x{n}, got {}x{}",
            r.rows(),
            r.cols()
        )));
    }
    if !r.is_upper_triangular() {
        return Err(Error::NotTriangular(format!(
            "{what} has nonzeros below the diagonal"
        )));
    }
    Ok(())
}

/// Structured QR of `q >= 2` stacked upper triangles of equal order.
pub fn qr_stacked_triangles(rs: &[Matrix]) -> Result<QrFactorization> {
    qr_stacked_triangles_with(rs, QrStrategy::Unblocked)
}

pub fn qr_stacked_triangles_with(rs: &[Matrix], strategy: QrStrategy) -> Result<QrFactorization> {
    if rs.len() < 2 {
        return Err(Error::dim(
            "stacked-triangle QR needs at least two triangles",
        ));
    }
    let n = rs[0].cols();
    for (k, r) in rs.iter().enumerate() {
        check_upper_triangular(r, n, &format!("triangle {k}"))?;
    }
    qr_with(
        Matrix::vstack(rs)?,
        Shape::StackedTriangles { q: rs.len() },
        strategy,
    )
}

/// Structured QR of an upper triangle stacked on a full rectangle.
pub fn qr_triangle_on_rect(r: &Matrix, b: &Matrix) -> Result<QrFactorization> {
    qr_triangle_on_rect_with(r, b, QrStrategy::Unblocked)
}

pub fn qr_triangle_on_rect_with(
    r: &Matrix,
    b: &Matrix,
    strategy: QrStrategy,
) -> Result<QrFactorization> {
    let n = r.cols();
    check_upper_triangular(r, n, "triangle")?;
    if b.cols() != n {
        return Err(Error::dim(format!(
            "rectangle has {} columns, triangle has {n}",
            b.cols()
        )));
    }
    qr_with(
        Matrix::vstack(&[r.clone(), b.clone()])?,
        Shape::TriangleOnRect {
            rect_rows: b.rows(),
        },
        strategy,
    )
}

/// Compact-WY factor of explicit reflectors: `H_0 ⋯ H_{k-1} = I - Y T Yᵀ`.
/// `y` is unit lower trapezoidal; entries on and above the diagonal are
/// ignored.
pub fn form_t(y: &Matrix, tau: &[f64]) -> Result<Matrix> {
    let (m, n) = y.shape();
    if tau.len() != n || m < n {
        return Err(Error::dim(format!(
            "form_t: {m}x{n} reflectors with {} multipliers",
            tau.len()
        )));
    }
    let refl = Reflectors {
        y,
        offset: 0,
        shape: Shape::Dense,
        m,
        n,
    };
    Ok(form_t_block(&refl, 0, tau, &mut FlopCounter::default()))
}

/// Trailing update through a two-block factor (`[I; Y1]` reflectors):
///
/// ```text
/// D   = C0 + Y1ᵀ C1
/// Ĉ0  = C0 - Tᵀ D
/// Ĉ1  = C1 - Y1 Tᵀ D
/// ```
///
/// `c0` has `n` rows, `c1` matches the lower block of the factor. `t` is
/// formed from the factor when not supplied.
pub fn apply_qt_structured(
    factor: &HouseholderFactor,
    t: Option<&Matrix>,
    c0: &Matrix,
    c1: &Matrix,
    flops: &mut FlopCounter,
) -> Result<(Matrix, Matrix)> {
    let (m, n) = (factor.rows(), factor.cols());
    match factor.shape {
        Shape::StackedTriangles { q: 2 } | Shape::TriangleOnRect { .. } => {}
        s => {
            return Err(Error::dim(format!(
                "structured update needs a two-block factor, got {s:?}"
            )))
        }
    }
    if c0.rows() != n || c1.rows() != m - n || c0.cols() != c1.cols() {
        return Err(Error::dim(format!(
            "structured update: factor {m}x{n}, C0 {}x{}, C1 {}x{}",
            c0.rows(),
            c0.cols(),
            c1.rows(),
            c1.cols()
        )));
    }
    let owned_t;
    let t = match t {
        Some(t) if t.shape() == (n, n) => t,
        Some(_) => return Err(Error::dim("T must be n x n")),
        None => {
            owned_t = factor.t_counted(flops);
            &owned_t
        }
    };
    let refl = factor.reflectors();
    let tails: Vec<_> = (0..n).map(|j| refl.tail(j)).collect();
    let tail_len: u64 = tails.iter().flatten().map(|r| r.len() as u64).sum();
    let k = c0.cols();
    let mut d = c0.clone();
    for col in 0..k {
        let c1c = c1.col(col);
        let dc = d.col_mut(col);
        for (j, tail) in tails.iter().enumerate() {
            let y = refl.col(j);
            let mut s = dc[j];
            for r in tail {
                for i in r.clone() {
                    s += y[i] * c1c[i - n];
                }
            }
            dc[j] = s;
        }
    }
    // W = Tᵀ D
    let mut w = d;
    for col in 0..k {
        let wc = w.col_mut(col);
        for i in (0..n).rev() {
            let mut s = t[(i, i)] * wc[i];
            for l in 0..i {
                s += t[(l, i)] * wc[l];
            }
            wc[i] = s;
        }
    }
    let mut hat0 = c0.clone();
    let mut hat1 = c1.clone();
    for col in 0..k {
        let wc = w.col(col);
        let h0 = hat0.col_mut(col);
        for (h, &wv) in h0.iter_mut().zip(wc) {
            if wv != 0.0 {
                *h -= wv;
            }
        }
        let h1 = hat1.col_mut(col);
        for (j, tail) in tails.iter().enumerate() {
            let wj = wc[j];
            if wj == 0.0 {
                continue;
            }
            let y = refl.col(j);
            for r in tail {
                for i in r.clone() {
                    h1[i - n] -= y[i] * wj;
                }
            }
        }
    }
    flops.add(k as u64 * (2 * tail_len + (n * n) as u64 + n as u64 + 2 * tail_len));
    Ok((hat0, hat1))
}
