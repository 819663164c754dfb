//! Clauset–Newman–Moore agglomerative modularity maximization.
//!
//! Starts from singleton communities and repeatedly merges the pair with the
//! largest modularity gain, stopping when the best gain is negative. The
//! gain comparison is exact: for an unweighted graph,
//! `dQ(a,b) = e_ab/m - d_a*d_b/(2m^2)`, so `sign(dQ)` and all comparisons
//! can be carried out on the integer `2m*e_ab - d_a*d_b`. Ties are broken by
//! the smallest community-index pair.

use std::collections::BTreeMap;

use crate::graph::Graph;

use super::Partition;

struct Community {
    /// Degree sum of members (in the original graph).
    degree: i64,
    /// Edge counts to adjacent communities.
    neighbors: BTreeMap<usize, i64>,
}

pub(super) fn run(g: &Graph) -> Partition {
    let n = g.node_count();
    let m = g.edge_count() as i64;
    if m == 0 {
        return Partition::from_labels(&(0..n).collect::<Vec<_>>());
    }

    let mut communities: Vec<Option<Community>> = (0..n)
        .map(|u| {
            let neighbors = g.neighbors(u).map(|v| (v, 1i64)).collect();
            Some(Community { degree: g.degree(u) as i64, neighbors })
        })
        .collect();
    // Union-find-free membership: community id -> member nodes.
    let mut members: Vec<Vec<usize>> = (0..n).map(|u| vec![u]).collect();

    loop {
        // Best pair by integer score 2m*e_ab - d_a*d_b, ties by smallest (a, b).
        let mut best: Option<(i64, usize, usize)> = None;
        for (a, slot) in communities.iter().enumerate() {
            let Some(comm) = slot else { continue };
            for (&b, &e_ab) in comm.neighbors.range(a + 1..) {
                let d_b = communities[b].as_ref().expect("neighbor is active").degree;
                let score = 2 * m * e_ab - comm.degree * d_b;
                let candidate = (score, a, b);
                best = match best {
                    None => Some(candidate),
                    Some(cur) => {
                        // Higher score wins; equal scores take the smaller pair.
                        if candidate.0 > cur.0
                            || (candidate.0 == cur.0 && (candidate.1, candidate.2) < (cur.1, cur.2))
                        {
                            Some(candidate)
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
        }

        let Some((score, a, b)) = best else { break };
        if score < 0 {
            break;
        }

        // Merge b into a (a < b by construction).
        let absorbed = communities[b].take().expect("b is active");
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);

        let mut merged = communities[a].take().expect("a is active");
        merged.degree += absorbed.degree;
        merged.neighbors.remove(&b);
        for (&c, &w) in absorbed.neighbors.iter() {
            if c == a {
                continue;
            }
            *merged.neighbors.entry(c).or_insert(0) += w;
            // Keep c's view consistent: its edges to b now point at a.
            let c_comm = communities[c].as_mut().expect("neighbor is active");
            let to_b = c_comm.neighbors.remove(&b).expect("symmetric entry");
            *c_comm.neighbors.entry(a).or_insert(0) += to_b;
        }
        communities[a] = Some(merged);
    }

    let mut labels = vec![0usize; n];
    for (c, member_list) in members.iter().enumerate() {
        for &u in member_list {
            labels[u] = c;
        }
    }
    Partition::from_labels(&labels)
}
