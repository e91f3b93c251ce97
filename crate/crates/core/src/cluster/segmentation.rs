use crate::error::{Error, Result};
use crate::types::{mix64, stable_hash, Value};

pub type NodeId = usize;

/// Bucket to replica-list assignment using ring offsets: bucket `b` lives on
/// `b mod N`, then `(b+1) mod N`, up to `K+1` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentationMap {
    pub node_count: usize,
    pub k_safety: usize,
    pub bucket_count: u32,
    pub assignment: Vec<Vec<NodeId>>,
}

pub fn build_segmentation(
    node_count: usize,
    k_safety: usize,
    bucket_count: u32,
) -> Result<SegmentationMap> {
    if node_count == 0 {
        return Err(Error::InvalidParameter(
            "node count must be at least 1".into(),
        ));
    }
    if node_count <= k_safety {
        return Err(Error::KSafety(format!(
            "cannot satisfy K-safety {k_safety} with {node_count} node(s)"
        )));
    }
    if (bucket_count as usize) < node_count {
        return Err(Error::InvalidParameter(format!(
            "bucket count {bucket_count} is smaller than node count {node_count}"
        )));
    }
    let assignment = (0..bucket_count as usize)
        .map(|b| (0..=k_safety).map(|i| (b + i) % node_count).collect())
        .collect();
    Ok(SegmentationMap {
        node_count,
        k_safety,
        bucket_count,
        assignment,
    })
}

/// Hash of a multi-column key. A single column hashes exactly like
/// [`stable_hash`], so repartitioning on a table's segmentation column lands
/// rows where the table itself is stored.
pub fn key_hash(values: &[&Value]) -> u64 {
    match values {
        [v] => stable_hash(v),
        _ => values
            .iter()
            .fold(0x9e37_79b9_7f4a_7c15, |h, v| mix64(h ^ stable_hash(v))),
    }
}

impl SegmentationMap {
    pub fn bucket_of(&self, key: &Value) -> u32 {
        (stable_hash(key) % self.bucket_count as u64) as u32
    }

    pub fn bucket_of_hash(&self, h: u64) -> u32 {
        (h % self.bucket_count as u64) as u32
    }

    pub fn route_key(&self, key: &Value) -> (u32, &[NodeId]) {
        let b = self.bucket_of(key);
        (b, &self.assignment[b as usize])
    }

    pub fn replicas(&self, bucket: u32) -> &[NodeId] {
        &self.assignment[bucket as usize]
    }

    pub fn primary_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.node_count];
        for r in &self.assignment {
            c[r[0]] += 1;
        }
        c
    }

    /// Buckets for which `node` holds a replica.
    pub fn buckets_on(&self, node: NodeId) -> Vec<u32> {
        (0..self.bucket_count)
            .filter(|b| self.assignment[*b as usize].contains(&node))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let m = build_segmentation(1, 0, 8).unwrap();
        assert!(m.assignment.iter().all(|r| r == &vec![0]));

        let m = build_segmentation(5, 2, 40).unwrap();
        for b in 0..40usize {
            assert_eq!(m.assignment[b], vec![b % 5, (b + 1) % 5, (b + 2) % 5]);
        }
        assert_eq!(m.primary_counts(), vec![8; 5]);

        let m = build_segmentation(3, 2, 12).unwrap();
        for r in &m.assignment {
            let mut s = r.clone();
            s.sort();
            assert_eq!(s, vec![0, 1, 2]);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            build_segmentation(2, 2, 8),
            Err(Error::KSafety(_))
        ));
        assert!(build_segmentation(0, 0, 8).is_err());
        assert!(build_segmentation(5, 1, 4).is_err());
    }

    #[test]
    fn routing_is_stable() {
        let m = build_segmentation(5, 2, 40).unwrap();
        let k = Value::Int(12345);
        assert_eq!(m.route_key(&k), m.route_key(&k));
        let one = build_segmentation(1, 0, 4).unwrap();
        assert_eq!(one.route_key(&k).1, &[0]);
        assert_eq!(key_hash(&[&k]), stable_hash(&k));
    }

    proptest! {
        #[test]
        fn replicas_distinct_and_primaries_balanced(n in 1usize..12, k in 0usize..4, extra in 0u32..50) {
            prop_assume!(n > k);
            let b = n as u32 + extra;
            let m = build_segmentation(n, k, b).unwrap();
            for r in &m.assignment {
                prop_assert_eq!(r.len(), k + 1);
                let mut s = r.clone();
                s.sort();
                s.dedup();
                prop_assert_eq!(s.len(), k + 1);
            }
            let c = m.primary_counts();
            prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
        }
    }
}
