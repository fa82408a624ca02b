use std::collections::BTreeSet;

use crate::mesh::{BoundaryTag, Mesh};
use crate::partition::DofPartition;
use crate::scalar::Scalar;

use super::InverseError;

/// Ties groups of neighbouring wall nodes to one shared traction value.
///
/// Cluster unknowns are node-major 3-vectors like the wall block itself.
/// Prolongation copies a cluster's vector to each of its nodes; restriction
/// is the transpose and sums over the cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationMap {
    /// Cluster index of every wall node, in wall-node order.
    pub cluster_of: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl AggregationMap {
    pub fn identity(wall_nodes: usize) -> Self {
        AggregationMap { cluster_of: (0..wall_nodes).collect(), sizes: vec![1; wall_nodes] }
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }

    /// Number of aggregated unknowns.
    pub fn dim(&self) -> usize {
        3 * self.num_clusters()
    }

    pub fn prolong<S: Scalar>(&self, c: &[S]) -> Vec<S> {
        assert_eq!(c.len(), self.dim());
        let mut g = Vec::with_capacity(3 * self.cluster_of.len());
        for &k in &self.cluster_of {
            g.extend_from_slice(&c[3 * k..3 * k + 3]);
        }
        g
    }

    pub fn restrict<S: Scalar>(&self, g: &[S]) -> Vec<S> {
        assert_eq!(g.len(), 3 * self.cluster_of.len());
        let mut c = vec![S::zero(); self.dim()];
        for (v, &k) in self.cluster_of.iter().enumerate() {
            for i in 0..3 {
                c[3 * k + i] += g[3 * v + i];
            }
        }
        c
    }
}

/// Greedy geometric clustering of the wall nodes into at most
/// `target_clusters` connected groups.
///
/// Seeds are taken in wall-node order among nodes not yet clustered; each
/// seed absorbs its nearest unclustered neighbours (by distance to the
/// seed) until the cluster holds `⌈nodes / target⌉` nodes. Small
/// leftovers are then merged into their smallest adjacent cluster until the
/// count fits the target.
pub fn build_aggregation(mesh: &Mesh, partition: &DofPartition, target_clusters: usize) -> Result<AggregationMap, InverseError> {
    let nodes = &partition.wall_nodes;
    let n = nodes.len();
    if target_clusters == 0 || target_clusters > n || 3 * target_clusters > partition.n3() {
        return Err(InverseError::Aggregation { n1: partition.n1(), n3: partition.n3(), target: target_clusters });
    }
    if target_clusters == n {
        return Ok(AggregationMap::identity(n));
    }
    let mut local = vec![usize::MAX; mesh.num_nodes()];
    for (k, &v) in nodes.iter().enumerate() {
        local[v] = k;
    }
    let adj: Vec<Vec<usize>> = {
        let full = mesh.surface_adjacency(BoundaryTag::ReservoirWall);
        nodes.iter().map(|&v| full[v].iter().map(|&u| local[u]).filter(|&u| u != usize::MAX).collect()).collect()
    };
    let cap = n.div_ceil(target_clusters);
    let dist2 = |a: usize, b: usize| {
        let (p, q) = (mesh.nodes[nodes[a]], mesh.nodes[nodes[b]]);
        (0..3).map(|c| (p[c] - q[c]) * (p[c] - q[c])).sum::<f64>()
    };

    const FREE: usize = usize::MAX;
    // Besides its surface neighbours, a node also neighbours any wall node
    // closer than its longest incident surface edge. This pairs the two
    // faces of a thin reservoir, which share no surface edge.
    let reach: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            let r2 = adj[a].iter().map(|&b| dist2(a, b)).fold(0.0, f64::max);
            let mut near: Vec<usize> = (0..n).filter(|&b| b != a && dist2(a, b) <= r2).collect();
            near.extend(adj[a].iter().copied());
            near.sort_unstable();
            near.dedup();
            near
        })
        .collect();

    let mut cluster_of = vec![FREE; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for seed in 0..n {
        if cluster_of[seed] != FREE {
            continue;
        }
        let id = members.len();
        cluster_of[seed] = id;
        let mut group = vec![seed];
        while group.len() < cap {
            let next = group
                .iter()
                .flat_map(|&m| reach[m].iter().copied())
                .filter(|&u| cluster_of[u] == FREE)
                .min_by(|&a, &b| dist2(seed, a).total_cmp(&dist2(seed, b)).then(a.cmp(&b)));
            let Some(u) = next else { break };
            cluster_of[u] = id;
            group.push(u);
        }
        members.push(group);
    }

    while members.iter().filter(|m| !m.is_empty()).count() > target_clusters {
        let small = (0..members.len())
            .filter(|&k| !members[k].is_empty())
            .min_by_key(|&k| (members[k].len(), k))
            .expect("at least one cluster");
        let neighbours: BTreeSet<usize> =
            members[small].iter().flat_map(|&m| reach[m].iter().map(|&u| cluster_of[u])).filter(|&k| k != small).collect();
        let Some(&into) = neighbours.iter().min_by_key(|&&k| (members[k].len(), k)) else {
            // an isolated piece of wall: nothing adjacent to merge with
            return Err(InverseError::Aggregation { n1: partition.n1(), n3: partition.n3(), target: target_clusters });
        };
        let moved = std::mem::take(&mut members[small]);
        for &m in &moved {
            cluster_of[m] = into;
        }
        members[into].extend(moved);
    }

    // compact the ids
    let mut renumber = vec![usize::MAX; members.len()];
    let mut sizes = Vec::new();
    for (k, m) in members.iter().enumerate() {
        if !m.is_empty() {
            renumber[k] = sizes.len();
            sizes.push(m.len());
        }
    }
    let cluster_of = cluster_of.iter().map(|&k| renumber[k]).collect();
    Ok(AggregationMap { cluster_of, sizes })
}
