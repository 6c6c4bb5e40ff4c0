use linklab::evaluation::{evaluate, Averaging};
use linklab::features::{Feature, VertexScores};
use linklab::graph::{EdgeList, Graph};
use linklab::prediction::{candidates, recommend, CandidatePolicy, Recommendations};
use linklab::segmentation::Partition;

#[test]
fn toy_instance_matches_brute_force_sort() {
    let g = Graph::from_pairs(6, [(0, 1), (1, 2), (3, 4), (0, 5)]).unwrap();
    let part = Partition::from_assignment(2, vec![0, 0, 0, 0, 1, 1]).unwrap();
    let scores = VertexScores {
        feature: Feature::Degree,
        values: vec![0.3, 0.9, 0.3, 0.7, 0.1, 0.5],
    };
    let recs = recommend(&g, &part, &scores, CandidatePolicy::IntraCluster, 3).unwrap();
    for u in 0..6 {
        let mut pool: Vec<usize> = (0..6)
            .filter(|&v| {
                v != u && part.cluster_of(v) == part.cluster_of(u) && !g.contains_edge(u, v)
            })
            .collect();
        // Every permutation is checked against the ranking rule; the one
        // that satisfies it is the oracle list.
        pool.sort_unstable();
        let mut best: Option<Vec<usize>> = None;
        permute(&mut pool.clone(), 0, &mut |p| {
            let ordered = p.windows(2).all(|w| {
                let (a, b) = (scores.values[w[0]], scores.values[w[1]]);
                a > b || (a == b && w[0] < w[1])
            });
            if ordered {
                best = Some(p.to_vec());
            }
        });
        let mut want = best.unwrap_or_default();
        want.truncate(3);
        let got: Vec<usize> = recs.lists[u].iter().map(|c| c.0).collect();
        assert_eq!(got, want, "target {u}");
    }
}

fn permute(xs: &mut Vec<usize>, i: usize, visit: &mut impl FnMut(&[usize])) {
    if i == xs.len() {
        visit(xs);
        return;
    }
    for j in i..xs.len() {
        xs.swap(i, j);
        permute(xs, i + 1, visit);
        xs.swap(i, j);
    }
}

#[test]
fn held_out_triangle_edge_is_recommended() {
    // Triangle A = {0,1,2} with (0,1) held out; triangle B = {3,4,5}.
    let observed = Graph::from_pairs(6, [(0, 2), (1, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
    let part = Partition::from_assignment(2, vec![0, 0, 0, 1, 1, 1]).unwrap();
    let c = candidates(&observed, &part, 0, CandidatePolicy::IntraCluster).unwrap();
    assert_eq!(c, vec![1]);
}

#[test]
fn eight_vertex_counting_example() {
    let held = EdgeList::new(vec![(0, 1), (0, 2), (3, 4)]);
    let lists = vec![
        vec![(5, 0.9), (1, 0.8), (6, 0.7), (2, 0.6)],
        vec![(0, 0.5)],
        vec![(7, 0.4)],
        vec![],
        vec![(3, 0.3), (6, 0.2)],
        vec![(0, 0.1)],
        vec![],
        vec![],
    ];
    let recs = Recommendations {
        lists,
        scorer: "fixed".into(),
        policy: CandidatePolicy::IntraCluster,
        top_n: 4,
    };
    let r = evaluate(&recs, &held, Averaging::Micro).unwrap();
    // Targets 0..=4 miss 2,1,1,1,1 edges: six misses in total.
    // N=1: heads 5, 0, 7, (none), 3; targets 1 and 4 hit.
    assert_eq!(r.precision_at(1), 2.0 / 4.0);
    assert_eq!(r.recall_at(1), 2.0 / 6.0);
    // N=2: target 0 adds 1, target 4 adds 6.
    assert_eq!(r.precision_at(2), 3.0 / 6.0);
    assert_eq!(r.recall_at(2), 3.0 / 6.0);
    // N>=4: target 0 has shown all four, with hits 1 and 2.
    assert_eq!(r.precision_at(4), 4.0 / 8.0);
    assert_eq!(r.recall_at(4), 4.0 / 6.0);
    assert_eq!(r.precision_at(10), r.precision_at(4));
    assert_eq!(r.targets, 5);
}
