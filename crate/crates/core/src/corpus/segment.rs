use super::{Document, Sentence, SentenceId};

/// Lowercased words that do not end a sentence when followed by `.`.
/// Single letters (initials) are also treated as abbreviations.
pub const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "inc", "ltd",
    "co", "corp", "no", "fig", "u.s", "u.k", "dept", "gen", "gov", "sen", "rep", "mt", "approx",
    "est", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

/// Splits a document into sentences.
///
/// A boundary is a `.`, `!` or `?` followed by whitespace and then an
/// uppercase letter or a digit. A `.` directly after an abbreviation is not a
/// boundary. Sentence texts are trimmed of surrounding whitespace.
pub fn segment_sentences(doc: &Document) -> Vec<Sentence> {
    let chars: Vec<char> = doc.text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_boundary(&chars, i) {
            push_sentence(&doc.doc_id, &chars[start..=i], &mut out);
            start = i + 1;
        }
        i += 1;
    }
    if start < chars.len() {
        push_sentence(&doc.doc_id, &chars[start..], &mut out);
    }
    out
}

fn push_sentence(doc_id: &str, chars: &[char], out: &mut Vec<Sentence>) {
    let text: String = chars.iter().collect();
    let text = text.trim();
    if text.is_empty() {
        return;
    }
    let id = SentenceId::new(doc_id, out.len() as u32);
    out.push(Sentence::new(id, text));
}

fn is_boundary(chars: &[char], i: usize) -> bool {
    if !matches!(chars[i], '.' | '!' | '?') {
        return false;
    }
    let mut j = i + 1;
    if j >= chars.len() || !chars[j].is_whitespace() {
        return false;
    }
    while j < chars.len() && chars[j].is_whitespace() {
        j += 1;
    }
    let Some(&next) = chars.get(j) else {
        return false;
    };
    if !(next.is_uppercase() || next.is_ascii_digit()) {
        return false;
    }
    chars[i] != '.' || !preceded_by_abbreviation(chars, i)
}

fn preceded_by_abbreviation(chars: &[char], dot: usize) -> bool {
    let mut k = dot;
    while k > 0 && (chars[k - 1].is_alphanumeric() || chars[k - 1] == '.') {
        k -= 1;
    }
    let word: String = chars[k..dot].iter().collect::<String>().to_lowercase();
    if word.is_empty() {
        return false;
    }
    if word.chars().count() == 1 && word.chars().all(char::is_alphabetic) {
        return true;
    }
    ABBREVIATIONS.contains(&word.as_str())
}
