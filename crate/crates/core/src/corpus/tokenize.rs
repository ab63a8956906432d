use super::Token;

/// Splits text into word and punctuation tokens.
///
/// A word is a maximal run of alphanumeric characters; a `.` or `,` sitting
/// between two digits stays inside the word (`3.5`, `1,000`). Every other
/// non-whitespace character is a token of its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let numeric_separator = (d == '.' || d == ',')
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if d.is_alphanumeric() || numeric_separator {
                    i += 1;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        let surface: String = chars[start..i].iter().collect();
        let normalized = surface.to_lowercase();
        tokens.push(Token { surface, normalized, start, end: i });
    }
    tokens
}
