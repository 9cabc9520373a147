use crate::embedding::EmbeddingSpace;

/// Window features: per token, the embeddings at offsets `-radius..=radius`
/// (zeros for OOV or out-of-bounds positions) followed by a constant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub width: usize,
    /// Row-major, one row per token.
    pub rows: Vec<f64>,
    pub oov: usize,
}

impl Features {
    pub fn len(&self) -> usize {
        self.rows.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.rows[t * self.width..(t + 1) * self.width]
    }

    pub fn oov_rate(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.oov as f64 / self.len() as f64
        }
    }
}

pub fn feature_width(radius: usize, dim: usize) -> usize {
    (2 * radius + 1) * dim + 1
}

pub fn featurize<S: AsRef<str>>(tokens: &[S], embeddings: &EmbeddingSpace, radius: usize) -> Features {
    let d = embeddings.dim();
    let width = feature_width(radius, d);
    let lookup: Vec<Option<&[f64]>> = tokens.iter().map(|t| embeddings.vector(t.as_ref())).collect();
    let oov = lookup.iter().filter(|v| v.is_none()).count();
    let n = tokens.len();
    let mut rows = vec![0.0; n * width];
    for t in 0..n {
        let row = &mut rows[t * width..(t + 1) * width];
        for (slot, offset) in (-(radius as isize)..=radius as isize).enumerate() {
            let pos = t as isize + offset;
            if pos < 0 || pos >= n as isize {
                continue;
            }
            if let Some(v) = lookup[pos as usize] {
                row[slot * d..(slot + 1) * d].copy_from_slice(v);
            }
        }
        row[width - 1] = 1.0;
    }
    Features { width, rows, oov }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> EmbeddingSpace {
        EmbeddingSpace::new("en", vec!["a".into(), "b".into()], 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn radius_zero() {
        let f = featurize(&["b", "zzz"], &space(), 0);
        assert_eq!(f.width, 3);
        assert_eq!(f.row(0), [3.0, 4.0, 1.0]);
        assert_eq!(f.row(1), [0.0, 0.0, 1.0]);
        assert_eq!(f.oov, 1);
        assert_eq!(f.oov_rate(), 0.5);
    }

    #[test]
    fn radius_one_pads_edges() {
        let f = featurize(&["a", "b"], &space(), 1);
        assert_eq!(f.width, 7);
        assert_eq!(f.row(0), [0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 1.0]);
        assert_eq!(f.row(1), [1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 1.0]);
    }
}
