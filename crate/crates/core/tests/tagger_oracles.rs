//! Viterbi decoding against brute-force path enumeration, and span F1 on
//! hand-enumerated cases.

use lexalign::tagger::{extract_spans, span_f1, LabelSet, Span, Weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best path by enumerating all `L^n` label sequences in lexicographic order;
/// only a strictly higher score replaces the incumbent.
fn brute_force(w: &Weights, emissions: &[f64], n: usize) -> Vec<usize> {
    let l = w.num_labels;
    let total = l.pow(n as u32);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for code in 0..total {
        let mut path = vec![0; n];
        let mut c = code;
        for t in (0..n).rev() {
            path[t] = c % l;
            c /= l;
        }
        let mut score = 0.0;
        let mut prev = w.boundary();
        for (t, &y) in path.iter().enumerate() {
            score += w.transition(prev, y) + emissions[t * l + y];
            prev = y;
        }
        score += w.transition(prev, w.boundary());
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((path, score));
        }
    }
    best.unwrap().0
}

#[test]
fn viterbi_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let labels = LabelSet::new(&["JOB_TITLE".to_string(), "ORG_NAME".to_string()]).unwrap();
    let l = labels.len();
    for case in 0..500 {
        let mut w = Weights::zeros(l, 1);
        // Small integer weights make exact ties common.
        let coarse = case % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| {
            if coarse {
                rng.random_range(-2..=2) as f64
            } else {
                rng.random_range(-1.0..1.0)
            }
        };
        for v in w.transitions.iter_mut() {
            *v = draw(&mut rng);
        }
        let n = rng.random_range(1..=4);
        let emissions: Vec<f64> = (0..n * l).map(|_| draw(&mut rng)).collect();
        assert_eq!(w.viterbi(&emissions), brute_force(&w, &emissions, n), "case {case}");
    }
}

fn types() -> Vec<String> {
    vec!["J".to_string(), "N".to_string()]
}

fn seq(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

#[test]
fn span_f1_hand_enumerated_table() {
    // Gold: two J spans and one N span. Predicted: one of the J spans and a
    // spurious N span. J: P = 1/1, R = 1/2, F1 = 2/3. N: P = 0, R = 0.
    let gold = vec![seq(&["B-J", "O", "B-J", "I-J", "O", "B-N"])];
    let pred = vec![seq(&["B-J", "O", "O", "O", "B-N", "O"])];
    let r = span_f1(&gold, &pred, &types()).unwrap();
    let j = r.get("J").unwrap();
    assert_eq!((j.gold, j.predicted, j.correct), (2, 1, 1));
    assert_eq!(j.precision, 1.0);
    assert_eq!(j.recall, 0.5);
    assert_eq!(j.f1, 2.0 * (1.0 * 0.5) / 1.5);
    let n = r.get("N").unwrap();
    assert_eq!((n.gold, n.predicted, n.correct), (1, 1, 0));
    assert_eq!(n.f1, 0.0);
    assert_eq!(r.macro_f1, (2.0 * (1.0 * 0.5) / 1.5) / 2.0);
}

#[test]
fn span_f1_exact_boundaries_and_identity() {
    let gold = vec![seq(&["O", "B-J", "I-J"])];
    let r = span_f1(&gold, &gold, &types()).unwrap();
    assert_eq!(r.get("J").unwrap().f1, 1.0);
    let pred = vec![seq(&["O", "B-J", "O"])];
    assert_eq!(span_f1(&gold, &pred, &types()).unwrap().get("J").unwrap().f1, 0.0);
}

#[test]
fn orphan_inside_label_starts_a_span() {
    assert_eq!(extract_spans(&["O", "I-J", "I-J"]), vec![Span::new("J", 1, 2)]);
    assert_eq!(extract_spans(&["B-J", "I-J", "O"]), vec![Span::new("J", 0, 1)]);
    assert_eq!(
        extract_spans(&["B-J", "B-J"]),
        vec![Span::new("J", 0, 0), Span::new("J", 1, 1)]
    );
    assert_eq!(
        extract_spans(&["B-J", "I-N"]),
        vec![Span::new("J", 0, 0), Span::new("N", 1, 1)]
    );
}
