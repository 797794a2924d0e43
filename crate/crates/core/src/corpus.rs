//! Bundled surfaces, chart frames and dual graphs used by the tests, the
//! acceptance suite and the book.
//!
//! The surfaces are `A_n: Y1*Y2 - Y3^(n+1)`, the pinch point
//! `Y1^2 - Y2^2*Y3`, a smooth germ `Y1`, a two-relation surface in four
//! variables, and two `Z_(p)` families: the constant `A_1` family and an
//! `A_2` special fiber deforming to `A_1`.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::arc::{ChartFrame, FrameCase};
use crate::expr::numbered_vars;
use crate::graph::{blow_up, BlowUpLocus, DualGraph, EdgeRecord, Vertex};
use crate::jet::NiceTriplePresentation;
use crate::ring::CoefficientRing;

fn triple(label: &str, ring: CoefficientRing, n: usize, rels: &[&str]) -> NiceTriplePresentation {
    NiceTriplePresentation::parse(label, ring, numbered_vars("Y", n), rels)
        .expect("corpus relation")
}

pub fn a_n(n: usize, ring: CoefficientRing) -> NiceTriplePresentation {
    triple(
        &format!("A{n}"),
        ring,
        3,
        &[&format!("Y1*Y2 - Y3^{}", n + 1)],
    )
}

pub fn pinch_point(ring: CoefficientRing) -> NiceTriplePresentation {
    triple("pinch", ring, 3, &["Y1^2 - Y2^2*Y3"])
}

pub fn smooth(ring: CoefficientRing) -> NiceTriplePresentation {
    triple("smooth", ring, 1, &["Y1"])
}

/// `Y1*Y2 = Y3^2`, `Y3*Y4 = Y1^2`.
pub fn two_relation(ring: CoefficientRing) -> NiceTriplePresentation {
    triple("ci2", ring, 4, &["Y1*Y2 - Y3^2", "Y3*Y4 - Y1^2"])
}

/// `Y1*Y2 - Y3^3 - p*Y3^2` over `Z_(p)`: `A_2` mod `p`, `A_1` over `Q`.
pub fn a2_to_a1(p: u64) -> NiceTriplePresentation {
    let ring = CoefficientRing::localized(p).expect("prime");
    triple("A2->A1", ring, 3, &[&format!("Y1*Y2 - Y3^3 - {p}*Y3^2")])
}

/// The five surfaces the oracle checks run over.
pub fn surfaces(ring: CoefficientRing) -> Vec<NiceTriplePresentation> {
    vec![
        a_n(1, ring),
        a_n(2, ring),
        a_n(3, ring),
        pinch_point(ring),
        two_relation(ring),
    ]
}

fn coords(k: usize) -> Vec<String> {
    let mut c = vec!["u".to_string(), "x1".to_string(), "x2".to_string()];
    c.truncate(k);
    c
}

/// A chart of the resolution of `A_n`: `Y1 = x1, Y2 = x1^n x2^(n+1), Y3 = x1 x2`.
pub fn a_n_frame(n: usize, ring: CoefficientRing) -> ChartFrame {
    let y2 = format!("x1^{n}*x2^{}", n + 1);
    ChartFrame::parse_chart(
        format!("A{n}-chart"),
        FrameCase::TwoComponents,
        coords(3),
        ring,
        &["x1", &y2, "x1*x2"],
    )
    .expect("corpus frame")
}

/// Normalization chart of the pinch point.
pub fn pinch_frame(ring: CoefficientRing) -> ChartFrame {
    ChartFrame::parse_chart(
        "pinch-chart",
        FrameCase::TwoComponents,
        coords(3),
        ring,
        &["x1*x2", "x1", "x2^2"],
    )
    .expect("corpus frame")
}

/// `Y1 = 0` cuts out a single point, so the chart is constant.
pub fn smooth_frame(ring: CoefficientRing) -> ChartFrame {
    ChartFrame::parse_chart(
        "smooth-chart",
        FrameCase::SingleComponent,
        coords(2),
        ring,
        &["0"],
    )
    .expect("corpus frame")
}

pub fn two_relation_frame(ring: CoefficientRing) -> ChartFrame {
    ChartFrame::parse_chart(
        "ci2-chart",
        FrameCase::TwoComponents,
        coords(3),
        ring,
        &["x1*x2", "x1*x2^3", "x1*x2^2", "x1"],
    )
    .expect("corpus frame")
}

/// Each corpus surface with a chart frame for it.
pub fn framed_surfaces(ring: CoefficientRing) -> Vec<(NiceTriplePresentation, ChartFrame)> {
    vec![
        (a_n(1, ring), a_n_frame(1, ring)),
        (a_n(2, ring), a_n_frame(2, ring)),
        (a_n(3, ring), a_n_frame(3, ring)),
        (pinch_point(ring), pinch_frame(ring)),
        (smooth(ring), smooth_frame(ring)),
        (two_relation(ring), two_relation_frame(ring)),
    ]
}

fn tree(selfs: &[i64], edges: &[(u32, u32)]) -> DualGraph {
    let vs = selfs
        .iter()
        .enumerate()
        .map(|(k, s)| Vertex::new(k as u32 + 1, *s, 0))
        .collect();
    let es: Vec<EdgeRecord> = edges
        .iter()
        .map(|&(i, j)| EdgeRecord { i, j, mult: 1 })
        .collect();
    DualGraph::new(vs, &es).expect("corpus graph")
}

/// `D_n`: a chain `1 - 2 - ... - (n-1)` with vertex `n` attached to `n-2`.
pub fn d_n(n: usize) -> DualGraph {
    assert!(n >= 4);
    let mut edges: Vec<(u32, u32)> = (1..n as u32 - 1).map(|i| (i, i + 1)).collect();
    edges.push((n as u32 - 2, n as u32));
    tree(&vec![-2; n], &edges)
}

/// `E_n` for `n` in 6..=8: chain of `n - 1` with a leg at the third vertex.
pub fn e_n(n: usize) -> DualGraph {
    assert!((6..=8).contains(&n));
    let mut edges: Vec<(u32, u32)> = (1..n as u32 - 1).map(|i| (i, i + 1)).collect();
    edges.push((3, n as u32));
    tree(&vec![-2; n], &edges)
}

/// Minimal negative-definite graphs with no contractible vertex.
pub fn minimal_graphs() -> Vec<(String, DualGraph)> {
    let mut out: Vec<(String, DualGraph)> = (1..=4)
        .map(|n| (format!("A{n}"), DualGraph::a_n(n)))
        .collect();
    out.push(("D4".into(), d_n(4)));
    out.push(("D5".into(), d_n(5)));
    out.push(("E6".into(), e_n(6)));
    out.push(("chain(-3,-2)".into(), DualGraph::chain(&[-3, -2])));
    out.push((
        "elliptic(-1)".into(),
        DualGraph::new(vec![Vertex::new(1, -1, 1)], &[]).expect("corpus graph"),
    ));
    out
}

/// `steps` random point blow-ups of `base`, at a free point of a curve or
/// at an intersection point.
pub fn random_blow_ups(base: &DualGraph, steps: usize, rng: &mut impl Rng) -> DualGraph {
    let mut g = base.clone();
    for _ in 0..steps {
        let edges: Vec<(u32, u32)> = g.edges().map(|(k, _)| k).collect();
        let locus = if !edges.is_empty() && rng.random_bool(0.5) {
            let &(i, j) = edges.choose(rng).expect("nonempty");
            BlowUpLocus::Intersection { i, j }
        } else {
            let ids = g.ids();
            BlowUpLocus::OnCurve {
                i: *ids.choose(rng).expect("nonempty graph"),
            }
        };
        g = blow_up(&g, locus).expect("valid locus");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{count_nr, intersection_matrix, is_negative_definite, minimal_model};
    use crate::jet::{fiber_at, Fiber};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn charts_land_on_their_surfaces() {
        let q = CoefficientRing::Rationals;
        for (tri, frame) in framed_surfaces(q) {
            let chart = frame.chart().unwrap();
            for f in tri.relations() {
                assert!(
                    f.evaluate_in(chart).unwrap().is_zero(),
                    "{} chart",
                    tri.label()
                );
            }
        }
    }

    #[test]
    fn family_fibers() {
        let fam = a2_to_a1(3);
        let sp = fiber_at(&fam, Fiber::Special).unwrap();
        assert_eq!(sp.relation_strings(), vec!["2*Y3^3 + Y1*Y2".to_string()]);
        let gen = fiber_at(&fam, Fiber::Generic).unwrap();
        assert_eq!(
            gen.relation_strings(),
            vec!["-Y3^3 + Y1*Y2 - 3*Y3^2".to_string()]
        );
    }

    #[test]
    fn minimal_graphs_are_minimal() {
        for (name, g) in minimal_graphs() {
            assert!(is_negative_definite(&intersection_matrix(&g)), "{name}");
            assert_eq!(count_nr(&g), g.len(), "{name}");
        }
        assert_eq!(d_n(5).degree(3), 3);
        assert_eq!(e_n(8).len(), 8);
    }

    #[test]
    fn random_blow_ups_stay_definite_and_reduce() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (name, base) in minimal_graphs() {
            let g = random_blow_ups(&base, 3, &mut rng);
            assert_eq!(g.len(), base.len() + 3);
            assert!(is_negative_definite(&intersection_matrix(&g)), "{name}");
            assert_eq!(minimal_model(&g).graph, base, "{name}");
        }
    }
}
