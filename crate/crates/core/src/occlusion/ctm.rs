use super::{validate_spans, AlignedUtterances, OcclusionError, WordSpan};
use crate::scoring::Token;

/// Parses CTM lines `utt_id channel start_sec duration_sec word [conf]`.
///
/// Blank lines and `;;` comments are ignored. Spans are grouped per
/// utterance, sorted by start time and checked for overlap.
pub fn parse_ctm(text: &str) -> Result<AlignedUtterances, OcclusionError> {
    let mut out = AlignedUtterances::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(";;") {
            continue;
        }
        let malformed = |message: String| OcclusionError::MalformedLine { line_no, message };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !(5..=6).contains(&fields.len()) {
            return Err(malformed(format!(
                "expected 5 or 6 fields, got {}",
                fields.len()
            )));
        }
        let start: f64 = fields[2]
            .parse()
            .map_err(|_| malformed(format!("bad start time `{}`", fields[2])))?;
        let duration: f64 = fields[3]
            .parse()
            .map_err(|_| malformed(format!("bad duration `{}`", fields[3])))?;
        let word = Token::normalized(fields[4])
            .ok_or_else(|| malformed(format!("bad word `{}`", fields[4])))?;
        let span = WordSpan::new(fields[0], word, start, start + duration)
            .map_err(|e| malformed(e.to_string()))?;
        out.entry(fields[0].to_string()).or_default().push(span);
    }
    for (utt_id, spans) in out.iter_mut() {
        validate_spans(utt_id, spans)?;
    }
    Ok(out)
}

/// Writes spans back as CTM (channel `1`).
pub fn format_ctm(utterances: &AlignedUtterances) -> String {
    let mut out = String::new();
    for spans in utterances.values() {
        for s in spans {
            out.push_str(&format!(
                "{} 1 {} {} {}\n",
                s.utt_id,
                s.t_start,
                s.t_end - s.t_start,
                s.word
            ));
        }
    }
    out
}
