//! Symmetric banded matrices and an in-place LDL^T factorization.
//!
//! The KKT systems assembled by the interior-point solver are symmetric
//! indefinite with a small bandwidth when the stage variables and their
//! constraint multipliers are interleaved, so a banded factorization keeps
//! every solve linear in the horizon length. The factorization is
//! unpivoted; the solver compensates by regularizing until the inertia is
//! correct, which also makes the factorization stable in practice.

/// Lower-band storage: entry `(i, j)` with `0 <= i - j <= hb` lives at
/// `data[j * (hb + 1) + (i - j)]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub hb: usize,
    pub data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, hb: usize) -> Self {
        Self {
            n,
            hb,
            data: vec![0.0; n * (hb + 1)],
        }
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.hb && i < self.n);
        j * (self.hb + 1) + (i - j)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let idx = self.flat_index(r, c);
        self.data[idx] += v;
    }

    /// y = A x for the full symmetric matrix.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for j in 0..self.n {
            let base = j * (self.hb + 1);
            y[j] += self.data[base] * x[j];
            let top = (self.hb).min(self.n - 1 - j);
            for d in 1..=top {
                let v = self.data[base + d];
                y[j + d] += v * x[j];
                y[j] += v * x[j + d];
            }
        }
    }

}

/// Signs of the diagonal of D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Unpivoted banded LDL^T factor. `data` holds D on the diagonal slots and
/// the strictly-lower part of L elsewhere.
#[derive(Debug, Clone)]
pub struct BandFactor {
    n: usize,
    hb: usize,
    data: Vec<f64>,
    pub inertia: Inertia,
}

/// Factors `a` as L D L^T without pivoting. A pivot counts as zero when it
/// is the result of catastrophic cancellation relative to the terms that
/// formed it (`rel_tol` of their magnitude sum); such pivots are nudged so
/// the factorization can continue, and callers regularize and refactor.
pub fn ldlt(a: &BandMatrix, rel_tol: f64) -> BandFactor {
    let n = a.n;
    let hb = a.hb;
    let w = hb + 1;
    let mut data = a.data.clone();
    let mut inertia = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for j in 0..n {
        // d_j = a_jj - sum_k L_jk^2 d_k over k in the band window
        let lo = j.saturating_sub(hb);
        let mut d = data[j * w];
        let mut magnitude = d.abs();
        for k in lo..j {
            let l_jk = data[k * w + (j - k)];
            let d_k = data[k * w];
            let term = l_jk * l_jk * d_k;
            d -= term;
            magnitude += term.abs();
        }
        let floor = rel_tol * magnitude + 1e-300;
        if d.abs() <= floor {
            inertia.zero += 1;
            d = if d >= 0.0 { floor } else { -floor };
        } else if d > 0.0 {
            inertia.positive += 1;
        } else {
            inertia.negative += 1;
        }
        data[j * w] = d;

        let top = hb.min(n - 1 - j);
        for r in 1..=top {
            let i = j + r;
            let mut v = data[j * w + r];
            let lo_i = i.saturating_sub(hb);
            let lo_k = lo.max(lo_i);
            for k in lo_k..j {
                let l_ik = data[k * w + (i - k)];
                let l_jk = data[k * w + (j - k)];
                v -= l_ik * l_jk * data[k * w];
            }
            data[j * w + r] = v / d;
        }
    }
    BandFactor {
        n,
        hb,
        data,
        inertia,
    }
}

impl BandFactor {
    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let w = self.hb + 1;
        // forward: L z = b
        for j in 0..self.n {
            let bj = b[j];
            if bj != 0.0 {
                let top = self.hb.min(self.n - 1 - j);
                for r in 1..=top {
                    b[j + r] -= self.data[j * w + r] * bj;
                }
            }
        }
        // diagonal
        for j in 0..self.n {
            b[j] /= self.data[j * w];
        }
        // backward: L^T x = z
        for j in (0..self.n).rev() {
            let top = self.hb.min(self.n - 1 - j);
            let mut acc = b[j];
            for r in 1..=top {
                acc -= self.data[j * w + r] * b[j + r];
            }
            b[j] = acc;
        }
    }
}
