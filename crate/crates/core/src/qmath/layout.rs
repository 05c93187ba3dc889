use crate::error::{Error, Result};

/// Index bookkeeping for splitting a tensor-product layout into targeted and
/// remaining subsystems.
///
/// Every flat index decomposes uniquely as `target_offsets[t] + rest_offsets[r]`,
/// where `t` enumerates the targeted subsystems in the order given (first most
/// significant) and `r` the remaining ones in their original order.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub target_dims: Vec<usize>,
    pub rest_dims: Vec<usize>,
    pub rest: Vec<usize>,
    pub target_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl Split {
    pub fn new(dims: &[usize], targets: &[usize]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Index("no target subsystems".into()));
        }
        let mut seen = vec![false; dims.len()];
        for &t in targets {
            if t >= dims.len() {
                return Err(Error::Index(format!(
                    "subsystem {t} out of range for {} subsystems",
                    dims.len()
                )));
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(Error::Index(format!("subsystem {t} listed twice")));
            }
        }
        let strides = strides(dims);
        let rest: Vec<usize> = (0..dims.len()).filter(|i| !seen[*i]).collect();
        let target_dims = targets.iter().map(|&t| dims[t]).collect();
        let rest_dims = rest.iter().map(|&r| dims[r]).collect();
        let target_offsets = offsets(targets.iter().map(|&t| (dims[t], strides[t])));
        let rest_offsets = offsets(rest.iter().map(|&r| (dims[r], strides[r])));
        Ok(Self { target_dims, rest_dims, rest, target_offsets, rest_offsets })
    }

    pub fn target_len(&self) -> usize {
        self.target_offsets.len()
    }

    pub fn rest_len(&self) -> usize {
        self.rest_offsets.len()
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every digit combination, first pair most significant.
fn offsets(parts: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut out = vec![0usize];
    for (dim, stride) in parts {
        out = out
            .iter()
            .flat_map(|&base| (0..dim).map(move |d| base + d * stride))
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_cover_every_index_once() {
        let dims = [2, 3, 4];
        let split = Split::new(&dims, &[2, 0]).unwrap();
        let mut all: Vec<usize> = split
            .target_offsets
            .iter()
            .flat_map(|t| split.rest_offsets.iter().map(move |r| t + r))
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..24).collect::<Vec<_>>());
        assert_eq!(split.target_dims, vec![4, 2]);
        assert_eq!(split.rest, vec![1]);
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(Split::new(&[2, 2], &[2]).is_err());
        assert!(Split::new(&[2, 2], &[1, 1]).is_err());
        assert!(Split::new(&[2, 2], &[]).is_err());
    }
}
