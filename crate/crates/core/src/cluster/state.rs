use crate::cluster::segmentation::{NodeId, SegmentationMap};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeState {
    pub up: bool,
    /// Holds current data. Cleared whenever the node goes down; set again by
    /// recovery.
    pub recovered: bool,
}

impl NodeState {
    pub fn serving(self) -> bool {
        self.up && self.recovered
    }
}

/// Up/down status of every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterState {
    pub nodes: Vec<NodeState>,
}

impl ClusterState {
    pub fn all_up(n: usize) -> ClusterState {
        ClusterState {
            nodes: vec![
                NodeState {
                    up: true,
                    recovered: true
                };
                n
            ],
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn set_node_state(&mut self, node: NodeId, up: bool) -> Result<()> {
        let s = self
            .nodes
            .get_mut(node)
            .ok_or_else(|| Error::InvalidParameter(format!("no node {node}")))?;
        if up != s.up {
            s.up = up;
            s.recovered = false;
        }
        Ok(())
    }

    pub fn mark_recovered(&mut self, node: NodeId) {
        self.nodes[node].recovered = true;
    }

    pub fn is_serving(&self, node: NodeId) -> bool {
        self.nodes.get(node).is_some_and(|s| s.serving())
    }

    pub fn down_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|n| !self.nodes[*n].up)
            .collect()
    }

    /// First serving replica of `bucket`.
    pub fn serving_replica(&self, map: &SegmentationMap, bucket: u32) -> Option<NodeId> {
        map.replicas(bucket)
            .iter()
            .copied()
            .find(|n| self.is_serving(*n))
    }

    pub fn uncovered_buckets(&self, map: &SegmentationMap) -> Vec<u32> {
        (0..map.bucket_count)
            .filter(|b| self.serving_replica(map, *b).is_none())
            .collect()
    }

    /// Every bucket still has a serving replica.
    pub fn is_safe(&self, map: &SegmentationMap) -> bool {
        self.uncovered_buckets(map).is_empty()
    }

    /// Serving node for every bucket, or the unsafe diagnostic.
    pub fn serving_assignment(&self, map: &SegmentationMap) -> Result<Vec<NodeId>> {
        (0..map.bucket_count)
            .map(|b| {
                self.serving_replica(map, b).ok_or_else(|| {
                    Error::ClusterUnsafe(format!(
                        "bucket {b} has no serving replica (down: {:?})",
                        self.down_nodes()
                    ))
                })
            })
            .collect()
    }

    /// Any serving node, used for replicated tables.
    pub fn any_serving(&self) -> Option<NodeId> {
        (0..self.nodes.len()).find(|n| self.is_serving(*n))
    }
}
