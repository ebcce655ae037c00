//! Multilinear interpolation on rectilinear grids stored row-major (last
//! axis varies fastest).

/// Query coordinate outside its axis range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutOfRange {
    pub axis: usize,
    pub value: f64,
}

/// Locates `x` on a strictly increasing axis: the lower index of the
/// enclosing cell and the fractional position inside it.
///
/// Returns `None` outside `[axis[0], axis[last]]`. A length-1 axis only
/// accepts its single value.
pub fn locate(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = axis.len();
    if n == 0 || !(x >= axis[0] && x <= axis[n - 1]) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let hi = axis.partition_point(|&a| a <= x).clamp(1, n - 1);
    let lo = hi - 1;
    let t = (x - axis[lo]) / (axis[hi] - axis[lo]);
    Some((lo, t))
}

/// Row-major strides for the given axis lengths.
pub fn strides(lens: &[usize]) -> Vec<usize> {
    let mut s = vec![1; lens.len()];
    for d in (0..lens.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * lens[d + 1];
    }
    s
}

/// Corner offsets and weights for a query; zero-weight corners are dropped,
/// so a query exactly on a grid point yields a single corner of weight 1.
pub fn corners(axes: &[&[f64]], query: &[f64]) -> Result<Vec<(usize, f64)>, OutOfRange> {
    debug_assert_eq!(axes.len(), query.len());
    let lens: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let st = strides(&lens);
    let mut out = vec![(0usize, 1.0f64)];
    for (d, (&axis, &x)) in axes.iter().zip(query).enumerate() {
        let (lo, t) = locate(axis, x).ok_or(OutOfRange { axis: d, value: x })?;
        let mut next = Vec::with_capacity(out.len() * 2);
        for &(off, w) in &out {
            if t < 1.0 {
                next.push((off + lo * st[d], w * (1.0 - t)));
            }
            if t > 0.0 {
                next.push((off + (lo + 1) * st[d], w * t));
            }
        }
        out = next;
    }
    Ok(out)
}

/// Interpolates `values` at `query`.
pub fn multilinear(axes: &[&[f64]], values: &[f64], query: &[f64]) -> Result<f64, OutOfRange> {
    let cs = corners(axes, query)?;
    Ok(cs.iter().map(|&(off, w)| w * values[off]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_midpoint() {
        let axis = [1.0, 2.0];
        assert_eq!(multilinear(&[&axis], &[10.0, 20.0], &[1.5]).unwrap(), 15.0);
    }

    #[test]
    fn bilinear_center_of_unit_square() {
        let a = [0.0, 1.0];
        let v = [0.0, 0.0, 0.0, 8.0];
        assert_eq!(multilinear(&[&a, &a], &v, &[0.5, 0.5]).unwrap(), 2.0);
    }

    #[test]
    fn out_of_range_names_axis() {
        let a = [0.0, 1.0];
        let b = [0.0, 1.0, 2.0];
        let v = vec![0.0; 6];
        assert_eq!(
            multilinear(&[&a, &b], &v, &[0.5, 2.5]),
            Err(OutOfRange {
                axis: 1,
                value: 2.5
            })
        );
    }

    #[test]
    fn singleton_axis_accepts_only_its_value() {
        let a = [3.0];
        assert_eq!(multilinear(&[&a], &[7.0], &[3.0]).unwrap(), 7.0);
        assert!(multilinear(&[&a], &[7.0], &[3.1]).is_err());
    }

    fn grid_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let axis = prop::collection::vec(0.1f64..5.0, 1..5).prop_map(|steps| {
            let mut acc = 0.0;
            steps
                .into_iter()
                .map(|s| {
                    acc += s;
                    acc
                })
                .collect::<Vec<_>>()
        });
        (axis.clone(), axis).prop_flat_map(|(a, b)| {
            let n = a.len() * b.len();
            (Just(a), Just(b), prop::collection::vec(-100.0f64..100.0, n))
        })
    }

    proptest! {
        #[test]
        fn exact_at_grid_points((a, b, v) in grid_strategy()) {
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    let got = multilinear(&[&a, &b], &v, &[x, y]).unwrap();
                    prop_assert_eq!(got, v[i * b.len() + j]);
                }
            }
        }

        #[test]
        fn bounded_by_cell_corners((a, b, v) in grid_strategy(), fx in 0.0f64..1.0, fy in 0.0f64..1.0) {
            let x = a[0] + fx * (a[a.len() - 1] - a[0]);
            let y = b[0] + fy * (b[b.len() - 1] - b[0]);
            let cs = corners(&[&a, &b], &[x, y]).unwrap();
            let lo = cs.iter().map(|&(o, _)| v[o]).fold(f64::INFINITY, f64::min);
            let hi = cs.iter().map(|&(o, _)| v[o]).fold(f64::NEG_INFINITY, f64::max);
            let got = multilinear(&[&a, &b], &v, &[x, y]).unwrap();
            let eps = 1e-12 * (lo.abs() + hi.abs() + 1.0);
            prop_assert!(got >= lo - eps && got <= hi + eps);
        }
    }
}
