/// Euclidean projection onto `{x : x ≥ 0, Σx ≤ delta}` by sort and threshold.
pub fn simplex_cap_projection(x: &[f64], delta: f64) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= delta {
        return clipped;
    }
    let mut sorted = clipped.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - delta) / (k + 1) as f64;
        if value > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    x.iter().map(|v| (v - tau).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_unchanged() {
        assert_eq!(simplex_cap_projection(&[0.5, 0.5], 1.0), vec![0.5, 0.5]);
    }

    #[test]
    fn cap_active() {
        assert_eq!(simplex_cap_projection(&[2.0, 0.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(simplex_cap_projection(&[3.0, 1.0], 2.0), vec![2.0, 0.0]);
    }

    #[test]
    fn negatives_clipped() {
        assert_eq!(simplex_cap_projection(&[-1.0, 0.25], 1.0), vec![0.0, 0.25]);
    }
}
