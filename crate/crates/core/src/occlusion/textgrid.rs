//! Praat TextGrid reader and writer.
//!
//! The reader works on the value stream shared by the long ("text") and
//! short formats: quoted strings, numbers and `<exists>` flags. Labels,
//! `=`, `:`, bracketed indices and `!` comments are skipped.

use super::{OcclusionError, WordSpan};
use crate::scoring::Token;

#[derive(Debug, Clone, PartialEq)]
enum Item {
    Str(String),
    Num(f64),
    Flag(String),
}

fn malformed(msg: impl Into<String>) -> OcclusionError {
    OcclusionError::MalformedFile(msg.into())
}

fn tokenize(text: &str) -> Result<Vec<Item>, OcclusionError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut items = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() || c == '=' || c == ':' => {
                chars.next();
            }
            '!' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err(malformed("unterminated string")),
                    }
                }
                items.push(Item::Str(s));
            }
            '<' => {
                chars.next();
                let flag: String = chars.by_ref().take_while(|&c| c != '>').collect();
                items.push(Item::Flag(flag));
            }
            '[' => {
                for c in chars.by_ref() {
                    if c == ']' {
                        break;
                    }
                }
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut num = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || matches!(d, '-' | '+' | '.' | 'e' | 'E') {
                        num.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let v = num
                    .parse::<f64>()
                    .map_err(|_| malformed(format!("bad number `{num}`")))?;
                items.push(Item::Num(v));
            }
            _ => {
                // bare label such as `xmin` or `intervals`
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || matches!(d, '"' | '[' | '=' | '<') {
                        break;
                    }
                    chars.next();
                }
            }
        }
    }
    Ok(items)
}

struct Cursor {
    items: std::vec::IntoIter<Item>,
}

impl Cursor {
    fn next(&mut self, what: &str) -> Result<Item, OcclusionError> {
        self.items
            .next()
            .ok_or_else(|| malformed(format!("unexpected end of file, expected {what}")))
    }

    fn num(&mut self, what: &str) -> Result<f64, OcclusionError> {
        match self.next(what)? {
            Item::Num(v) => Ok(v),
            other => Err(malformed(format!("expected {what}, found {other:?}"))),
        }
    }

    fn count(&mut self, what: &str) -> Result<usize, OcclusionError> {
        let v = self.num(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(malformed(format!(
                "{what} must be a non-negative integer, got {v}"
            )));
        }
        Ok(v as usize)
    }

    fn string(&mut self, what: &str) -> Result<String, OcclusionError> {
        match self.next(what)? {
            Item::Str(s) => Ok(s),
            other => Err(malformed(format!("expected {what}, found {other:?}"))),
        }
    }
}

/// Labels treated as silence in addition to empty ones.
const SILENCE_LABELS: &[&str] = &["sil", "sp", "<eps>"];

fn is_silence(label: &str) -> bool {
    let l = label.trim();
    l.is_empty() || SILENCE_LABELS.iter().any(|s| s.eq_ignore_ascii_case(l))
}

/// Reads the interval tier `tier_name` of a TextGrid as word spans of
/// utterance `utt_id`. Empty and silence labels are skipped.
pub fn parse_textgrid(
    text: &str,
    tier_name: &str,
    utt_id: &str,
) -> Result<Vec<WordSpan>, OcclusionError> {
    let mut cur = Cursor {
        items: tokenize(text)?.into_iter(),
    };
    let file_type = cur.string("file type")?;
    if file_type != "ooTextFile" {
        return Err(malformed(format!("not a Praat text file ({file_type})")));
    }
    let class = cur.string("object class")?;
    if class != "TextGrid" {
        return Err(malformed(format!("object class is {class}, not TextGrid")));
    }
    cur.num("xmin")?;
    cur.num("xmax")?;
    let n_tiers = match cur.items.next() {
        None => 0,
        Some(Item::Flag(f)) if f == "exists" => cur.count("tier count")?,
        Some(Item::Flag(_)) => 0,
        Some(other) => return Err(malformed(format!("expected tier flag, found {other:?}"))),
    };

    for _ in 0..n_tiers {
        let tier_class = cur.string("tier class")?;
        let name = cur.string("tier name")?;
        cur.num("tier xmin")?;
        cur.num("tier xmax")?;
        let n = cur.count("interval count")?;
        match tier_class.as_str() {
            "IntervalTier" => {
                let mut spans = Vec::new();
                for _ in 0..n {
                    let a = cur.num("interval xmin")?;
                    let b = cur.num("interval xmax")?;
                    let label = cur.string("interval text")?;
                    if name != tier_name || is_silence(&label) {
                        continue;
                    }
                    let Some(word) = Token::normalized(label.trim()) else {
                        continue;
                    };
                    spans.push(WordSpan::new(utt_id, word, a, b)?);
                }
                if name == tier_name {
                    super::validate_spans(utt_id, &mut spans)?;
                    return Ok(spans);
                }
            }
            "TextTier" => {
                if name == tier_name {
                    return Err(malformed(format!("tier `{name}` is a point tier")));
                }
                for _ in 0..n {
                    cur.num("point time")?;
                    cur.string("point mark")?;
                }
            }
            other => return Err(malformed(format!("unknown tier class {other}"))),
        }
    }
    Err(OcclusionError::TierNotFound(tier_name.to_string()))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Writes spans as a long-format TextGrid with a single interval tier,
/// filling gaps with empty intervals. `xmax` is extended to the last span.
pub fn format_textgrid(spans: &[WordSpan], tier_name: &str, xmax: f64) -> String {
    let end = spans.iter().map(|s| s.t_end).fold(xmax, f64::max);
    let mut intervals: Vec<(f64, f64, String)> = Vec::new();
    let mut t = 0.0;
    for s in spans {
        if s.t_start > t {
            intervals.push((t, s.t_start, String::new()));
        }
        intervals.push((s.t_start, s.t_end, s.word.to_string()));
        t = s.t_end;
    }
    if end > t || intervals.is_empty() {
        intervals.push((t, end.max(t), String::new()));
    }

    let mut out = String::new();
    out.push_str("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n");
    out.push_str(&format!(
        "xmin = 0\nxmax = {end}\ntiers? <exists>\nsize = 1\nitem []:\n"
    ));
    out.push_str("    item [1]:\n        class = \"IntervalTier\"\n");
    out.push_str(&format!("        name = {}\n", quote(tier_name)));
    out.push_str(&format!("        xmin = 0\n        xmax = {end}\n"));
    out.push_str(&format!("        intervals: size = {}\n", intervals.len()));
    for (i, (a, b, text)) in intervals.iter().enumerate() {
        out.push_str(&format!(
            "        intervals [{}]:\n            xmin = {a}\n            xmax = {b}\n            text = {}\n",
            i + 1,
            quote(text)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LONG: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 0.5
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 0.5
        intervals: size = 1
        intervals [1]:
            xmin = 0
            xmax = 0.5
            text = "DH"
    item [2]:
        class = "IntervalTier"
        name = "words"
        xmin = 0
        xmax = 0.5
        intervals: size = 3
        intervals [1]:
            xmin = 0.0
            xmax = 0.12
            text = "the"
        intervals [2]:
            xmin = 0.12
            xmax = 0.30
            text = ""
        intervals [3]:
            xmin = 0.30
            xmax = 0.5
            text = "sp"
"#;

    const SHORT: &str = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n0.5\n<exists>\n1\n\"IntervalTier\"\n\"words\"\n0\n0.5\n2\n0\n0.12\n\"the\"\n0.12\n0.5\n\"\"\n";

    #[test]
    fn long_format() {
        let spans = parse_textgrid(LONG, "words", "u1").unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].word.as_str(), "THE");
        assert_eq!((spans[0].t_start, spans[0].t_end), (0.0, 0.12));
        assert_eq!(spans[0].utt_id, "u1");
    }

    #[test]
    fn short_format() {
        let spans = parse_textgrid(SHORT, "words", "u1").unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].word.as_str(), "THE");
    }

    #[test]
    fn missing_tier() {
        assert_eq!(
            parse_textgrid(LONG, "syllables", "u1").unwrap_err(),
            OcclusionError::TierNotFound("syllables".into())
        );
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(
            parse_textgrid("hello", "words", "u"),
            Err(OcclusionError::MalformedFile(_))
        ));
        let truncated = &LONG[..LONG.len() / 2];
        assert!(matches!(
            parse_textgrid(truncated, "words", "u"),
            Err(OcclusionError::MalformedFile(_))
        ));
    }

    #[test]
    fn quoted_quotes_survive() {
        let items = tokenize(r#""say ""hi""" 1.5 <exists> [3] ! comment "x""#).unwrap();
        assert_eq!(
            items,
            vec![
                Item::Str("say \"hi\"".into()),
                Item::Num(1.5),
                Item::Flag("exists".into()),
            ]
        );
    }

    #[test]
    fn writer_fills_gaps() {
        let spans = vec![
            WordSpan::new("u", Token::new("A").unwrap(), 0.1, 0.2).unwrap(),
            WordSpan::new("u", Token::new("B").unwrap(), 0.25, 0.4).unwrap(),
        ];
        let tg = format_textgrid(&spans, "words", 1.0);
        assert!(tg.contains("intervals: size = 5"));
        assert_eq!(parse_textgrid(&tg, "words", "u").unwrap(), spans);
    }
}
