//! Small dense Levenberg–Marquardt solver with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Fit {
    pub params: Vec<f64>,
    pub cost: f64,
}

pub(crate) fn minimize<F>(f: F, p0: &[f64], max_iter: usize) -> Fit
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut p = p0.to_vec();
    let mut r = f(&p);
    let mut c = cost(&r);
    let mut mu = 1e-3;
    for _ in 0..max_iter {
        let jac = jacobian(&f, &p, r.len());
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..p.len() {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let rt = f(&trial);
            let ct = cost(&rt);
            if ct.is_finite() && ct < c {
                let small = step.norm() <= 1e-13 * (1.0 + DVector::from_column_slice(&p).norm());
                p = trial;
                r = rt;
                c = ct;
                mu = (mu / 3.0).max(1e-12);
                improved = !small;
                break;
            }
            mu *= 4.0;
        }
        if !improved || c < 1e-30 {
            break;
        }
    }
    Fit { params: p, cost: c }
}

fn jacobian<F>(f: &F, p: &[f64], m: usize) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut j = DMatrix::zeros(m, p.len());
    for k in 0..p.len() {
        let h = 1e-6 * (1.0 + p[k].abs());
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        let (fa, fb) = (f(&a), f(&b));
        for i in 0..m {
            j[(i, k)] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    j
}
