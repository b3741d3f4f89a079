//! Dense complex products on column-major buffers, backed by `matrixmultiply`.

use matrixmultiply::CGemmOption::Standard;
use num_complex::{Complex32, Complex64};

const GRAM_ROW_BLOCK: usize = 2048;

// `Complex<T>` is `repr(C)` with fields `re, im`, identical in layout to `[T; 2]`.
fn c32_ptr(p: *const Complex32) -> *const [f32; 2] {
    p.cast()
}

fn c64_ptr(p: *const Complex64) -> *const [f64; 2] {
    p.cast()
}

/// `G = H^* H` for a column-major `rows x cols` matrix, accumulated in f64.
/// Returns the `cols x cols` Hermitian matrix, column-major.
pub(crate) fn gram(h: &[Complex32], rows: usize, cols: usize) -> Vec<Complex64> {
    assert_eq!(h.len(), rows * cols);
    let mut g = vec![Complex64::new(0.0, 0.0); cols * cols];
    let block = GRAM_ROW_BLOCK.min(rows);
    let mut plain = vec![Complex64::new(0.0, 0.0); block * cols];
    let mut conj = vec![Complex64::new(0.0, 0.0); block * cols];
    let mut r0 = 0;
    while r0 < rows {
        let nb = block.min(rows - r0);
        for j in 0..cols {
            let src = &h[j * rows + r0..j * rows + r0 + nb];
            for (k, z) in src.iter().enumerate() {
                let w = Complex64::new(z.re as f64, z.im as f64);
                plain[j * nb + k] = w;
                conj[j * nb + k] = w.conj();
            }
        }
        let beta = if r0 == 0 { [0.0, 0.0] } else { [1.0, 0.0] };
        // A[i, k] = conj(H[r0 + k, i]) lives at conj[i * nb + k].
        unsafe {
            matrixmultiply::zgemm(
                Standard,
                Standard,
                cols,
                nb,
                cols,
                [1.0, 0.0],
                c64_ptr(conj.as_ptr()),
                nb as isize,
                1,
                c64_ptr(plain.as_ptr()),
                1,
                nb as isize,
                beta,
                g.as_mut_ptr().cast(),
                1,
                cols as isize,
            );
        }
        r0 += nb;
    }
    for i in 0..cols {
        g[i * cols + i].im = 0.0;
        for j in i + 1..cols {
            let avg = (g[j * cols + i] + g[i * cols + j].conj()) * 0.5;
            g[j * cols + i] = avg;
            g[i * cols + j] = avg.conj();
        }
    }
    g
}

/// `C = A B` with `A` `m x k` and `B` `k x n`, all column-major.
pub(crate) fn matmul(a: &[Complex32], m: usize, k: usize, b: &[Complex32], n: usize) -> Vec<Complex32> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![Complex32::new(0.0, 0.0); m * n];
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::cgemm(
            Standard,
            Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            c32_ptr(a.as_ptr()),
            1,
            m as isize,
            c32_ptr(b.as_ptr()),
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr().cast(),
            1,
            m as isize,
        );
    }
    c
}

/// `C += alpha * A B^*` with `A` `m x k`, `B` `n x k` and `C` `m x n`, column-major.
pub(crate) fn add_mul_adjoint(
    c: &mut [Complex32],
    alpha: f32,
    a: &[Complex32],
    m: usize,
    k: usize,
    b: &[Complex32],
    n: usize,
) {
    assert_eq!(c.len(), m * n);
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), n * k);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    let b_conj: Vec<Complex32> = b.iter().map(|z| z.conj()).collect();
    // (B^*)[l, j] = conj(B[j, l]) lives at b_conj[l * n + j].
    unsafe {
        matrixmultiply::cgemm(
            Standard,
            Standard,
            m,
            k,
            n,
            [alpha, 0.0],
            c32_ptr(a.as_ptr()),
            1,
            m as isize,
            c32_ptr(b_conj.as_ptr()),
            n as isize,
            1,
            [1.0, 0.0],
            c.as_mut_ptr().cast(),
            1,
            m as isize,
        );
    }
}
