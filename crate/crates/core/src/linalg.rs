//! Small dense helpers the physics modules share.

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix};

use crate::{Error, Result};

/// Solves the continuous Lyapunov equation `A V + V Aᵀ + D = 0` for symmetric `V`.
///
/// Only the upper triangle of `V` is unknown, so the system has `n(n+1)/2`
/// rows instead of the `n²` of the plain Kronecker form.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::invalid("lyapunov", "matrix dimensions disagree"));
    }
    let m = n * (n + 1) / 2;
    let index = |i: usize, j: usize| -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row-major packing of the upper triangle
        i * n - i * (i + 1) / 2 + j
    };

    let mut lhs = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..n {
        for j in i..n {
            let row = index(i, j);
            rhs[row] = -d[(i, j)];
            for k in 0..n {
                let aik = a[(i, k)];
                if aik != 0.0 {
                    lhs[(row, index(k, j))] += aik;
                }
                let ajk = a[(j, k)];
                if ajk != 0.0 {
                    lhs[(row, index(i, k))] += ajk;
                }
            }
        }
    }

    let solution = lhs.lu().solve(&rhs).ok_or(Error::Singular("lyapunov"))?;
    if solution.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular("lyapunov"));
    }
    let mut v = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = solution[index(i, j)];
            v[(i, j)] = x;
            v[(j, i)] = x;
        }
    }
    Ok(v)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// Accurate to roughly machine precision; meant for the short-step
/// propagators of the Monte-Carlo integrator, where `‖A dt‖` is small.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a / 2f64.powi(squarings as i32);

    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.abs().max() < 1e-18 * result.abs().max() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Two-mode symplectic form for the ordering `[X+, Y+, X-, Y-]`.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut omega = Matrix4::zeros();
    omega[(0, 1)] = 1.0;
    omega[(1, 0)] = -1.0;
    omega[(2, 3)] = 1.0;
    omega[(3, 2)] = -1.0;
    omega
}

/// Smallest eigenvalue of the Hermitian matrix `V + (i/2) Ω`.
///
/// Evaluated through the real 8×8 embedding `[[Re, -Im], [Im, Re]]`, whose
/// spectrum is that of the Hermitian matrix with every eigenvalue doubled.
pub fn uncertainty_min_eigenvalue(v: &Matrix4<f64>) -> f64 {
    let im = symplectic_form() * 0.5;
    let mut embed = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            embed[(i, j)] = v[(i, j)];
            embed[(i + 4, j + 4)] = v[(i, j)];
            embed[(i, j + 4)] = -im[(i, j)];
            embed[(i + 4, j)] = im[(i, j)];
        }
    }
    embed.symmetric_eigen().eigenvalues.min()
}

/// Largest absolute asymmetry `|V_ij - V_ji|`.
pub fn asymmetry<const N: usize>(v: &SMatrix<f64, N, N>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in (i + 1)..N {
            worst = worst.max((v[(i, j)] - v[(j, i)]).abs());
        }
    }
    worst
}

/// Determinant of a 2×2 block starting at `(row, col)`.
pub(crate) fn block_det(v: &Matrix4<f64>, row: usize, col: usize) -> f64 {
    v[(row, col)] * v[(row + 1, col + 1)] - v[(row, col + 1)] * v[(row + 1, col)]
}
