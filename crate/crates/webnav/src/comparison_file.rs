//! Comparison dataset files. Each line is either a whole pair (a JSON array
//! of two records) or a single record, in which case consecutive lines form
//! a pair. The layout is detected from the first non-blank line.

use std::io::{BufRead, Write};

use webnav_core::comparisons::{ComparisonPair, ComparisonRecord, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    PairPerLine,
    RecordPerLine,
}

/// Streams the file once, recording every problem with its 1-based line.
pub fn validate_reader<R: BufRead>(reader: R) -> std::io::Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut layout = None;
    let mut pending: Option<(usize, Option<ComparisonRecord>)> = None;
    for (i, line) in reader.lines().enumerate() {
        let (number, line) = (i + 1, line?);
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let layout = *layout.get_or_insert(if text.starts_with('[') {
            Layout::PairPerLine
        } else {
            Layout::RecordPerLine
        });
        match layout {
            Layout::PairPerLine => match serde_json::from_str::<ComparisonPair>(text) {
                Ok(pair) => report.add_pair([number, number], &pair),
                Err(e) => {
                    report.add_undecodable_pair();
                    report.add_malformed(number, e.to_string());
                }
            },
            Layout::RecordPerLine => {
                let record = match serde_json::from_str::<ComparisonRecord>(text) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        report.add_malformed(number, e.to_string());
                        None
                    }
                };
                match pending.take() {
                    None => pending = Some((number, record)),
                    Some((first_line, first)) => match (first, record) {
                        (Some(a), Some(b)) => report.add_pair([first_line, number], &[a, b]),
                        _ => report.add_undecodable_pair(),
                    },
                }
            }
        }
    }
    if let Some((line, _)) = pending {
        report.add_undecodable_pair();
        report.add_malformed(line, "record has no partner (odd number of records)");
    }
    Ok(report)
}

/// Writes one pair per line.
pub fn write_pairs<'a, W: Write>(mut writer: W, pairs: impl IntoIterator<Item = &'a ComparisonPair>) -> std::io::Result<()> {
    for pair in pairs {
        serde_json::to_writer(&mut writer, pair)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use webnav_core::comparisons::{ComparisonQuestion, ComparisonQuote, ComparisonTokens, Violation};

    fn record(score: f64) -> ComparisonRecord {
        ComparisonRecord {
            question: ComparisonQuestion {
                text: "Why is the sky blue?".into(),
                dataset: "eli5".into(),
                id: "q1".into(),
            },
            quotes: vec![ComparisonQuote {
                title: "Sky".into(),
                extract: "Rayleigh scattering".into(),
            }],
            answer: "Scattering [1].".into(),
            tokens: ComparisonTokens {
                prefix: vec![1, 2],
                completion: vec![3],
            },
            score,
        }
    }

    #[test]
    fn pair_per_line() {
        let mut buf = Vec::new();
        write_pairs(&mut buf, &[[record(0.5), record(-0.5)], [record(0.0), record(0.0)], [record(0.5), record(-0.4)]]).unwrap();
        buf.extend_from_slice(b"\n[not json\n");
        let report = validate_reader(buf.as_slice()).unwrap();
        assert_eq!((report.pairs, report.valid, report.ties), (4, 2, 1));
        assert_eq!(report.failing_lines(), vec![3, 5]);
        assert!(matches!(report.violations[1].1, Violation::Malformed(_)));
    }

    #[test]
    fn record_per_line() {
        let mut text = String::new();
        for score in [0.25, -0.25, 0.3, 0.3] {
            text.push_str(&serde_json::to_string(&record(score)).unwrap());
            text.push('\n');
        }
        text.push_str(&serde_json::to_string(&record(1.0)).unwrap());
        let report = validate_reader(text.as_bytes()).unwrap();
        assert_eq!((report.pairs, report.valid), (3, 1));
        assert_eq!(report.failing_lines(), vec![3, 5]);
    }
}
