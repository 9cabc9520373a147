use super::corpus::Bio;

/// An entity mention over inclusive token indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub entity_type: String,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(entity_type: impl Into<String>, start: usize, end: usize) -> Self {
        Self {
            entity_type: entity_type.into(),
            start,
            end,
        }
    }
}

/// Maximal spans under the conlleval convention: `B-e` always opens a span,
/// and an `I-e` that does not continue an `e` span opens one too. Malformed
/// labels are treated as `O`.
pub fn extract_spans<S: AsRef<str>>(labels: &[S]) -> Vec<Span> {
    let mut spans: Vec<Span> = Vec::new();
    let mut open = false;
    for (i, label) in labels.iter().enumerate() {
        match Bio::parse(label.as_ref()) {
            Some(Bio::Begin(ty)) => {
                spans.push(Span::new(ty, i, i));
                open = true;
            }
            Some(Bio::Inside(ty)) => match spans.last_mut() {
                Some(last) if open && last.entity_type == ty => last.end = i,
                _ => {
                    spans.push(Span::new(ty, i, i));
                    open = true;
                }
            },
            Some(Bio::Outside) | None => open = false,
        }
    }
    spans
}

/// BIO labels for non-overlapping spans over a sequence of `len` tokens.
pub fn encode_spans(spans: &[Span], len: usize) -> Vec<String> {
    let mut labels = vec!["O".to_string(); len];
    for s in spans {
        labels[s.start] = format!("B-{}", s.entity_type);
        for l in &mut labels[s.start + 1..=s.end] {
            *l = format!("I-{}", s.entity_type);
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_cases() {
        assert_eq!(extract_spans(&["B-J", "I-J", "O"]), [Span::new("J", 0, 1)]);
        assert_eq!(extract_spans(&["O", "I-J", "I-J"]), [Span::new("J", 1, 2)]);
        assert_eq!(
            extract_spans(&["B-J", "B-J"]),
            [Span::new("J", 0, 0), Span::new("J", 1, 1)]
        );
        assert_eq!(
            extract_spans(&["B-J", "I-N"]),
            [Span::new("J", 0, 0), Span::new("N", 1, 1)]
        );
        assert_eq!(extract_spans::<&str>(&[]), []);
    }

    fn span_lists() -> impl Strategy<Value = (Vec<Span>, usize)> {
        // Runs of (gap, length, type) laid out left to right.
        prop::collection::vec((0usize..3, 1usize..4, prop::bool::ANY), 0..6).prop_map(|runs| {
            let mut spans = Vec::new();
            let mut pos = 0;
            for (gap, len, job) in runs {
                pos += gap;
                let ty = if job { "JOB_TITLE" } else { "ORG_NAME" };
                spans.push(Span::new(ty, pos, pos + len - 1));
                pos += len;
            }
            (spans, pos + 1)
        })
    }

    proptest! {
        #[test]
        fn encode_then_extract_is_identity((spans, len) in span_lists()) {
            prop_assert_eq!(extract_spans(&encode_spans(&spans, len)), spans);
        }
    }
}
