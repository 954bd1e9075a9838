//! Deterministic word tokenizer.
//!
//! Text is lowercased and split on whitespace. Leading and trailing
//! punctuation comes off one character per token, English clitics are split
//! in treebank style (`don't` → `do n't`, `cat's` → `cat 's`), and URLs
//! collapse to a single [`URL_TOKEN`].

/// Token that stands in for any URL.
pub const URL_TOKEN: &str = "<url>";

const CLITICS: [&str; 6] = ["'s", "'re", "'ve", "'ll", "'d", "'m"];
const NEGATION: &str = "n't";

/// Punctuation for tokenization purposes: anything that is not a letter or digit.
pub fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric()
}

/// True for tokens made only of punctuation characters.
pub fn is_punct_token(token: &str) -> bool {
    token != URL_TOKEN && !token.is_empty() && token.chars().all(is_punct_char)
}

fn is_clitic(s: &str) -> bool {
    s == NEGATION || CLITICS.contains(&s)
}

fn looks_like_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://") || s.starts_with("www.")
}

/// Tokenizes raw text into lowercased surface strings.
pub fn tokenize(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in raw.split_whitespace() {
        let lower = word.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
        split_word(&lower, &mut out);
    }
    out
}

fn split_word(word: &str, out: &mut Vec<String>) {
    if word == URL_TOKEN {
        out.push(URL_TOKEN.to_string());
        return;
    }

    // URLs: only wrapper punctuation is peeled off.
    let start = word
        .char_indices()
        .find(|&(_, c)| !matches!(c, '(' | '[' | '<' | '"' | '\''))
        .map(|(i, _)| i)
        .unwrap_or(word.len());
    let inner = word[start..].trim_end_matches(['.', ',', ';', ':', '!', '?', ')', ']', '>', '"', '\'']);
    if !inner.is_empty() && looks_like_url(inner) {
        out.extend(word[..start].chars().map(String::from));
        out.push(URL_TOKEN.to_string());
        out.extend(word[start + inner.len()..].chars().map(String::from));
        return;
    }

    let mut rest = word;
    while let Some(c) = rest.chars().next() {
        if !is_punct_char(c) || is_clitic(rest) {
            break;
        }
        out.push(c.to_string());
        rest = &rest[c.len_utf8()..];
    }

    let mut trailing = Vec::new();
    while let Some(c) = rest.chars().next_back() {
        if !is_punct_char(c) {
            break;
        }
        trailing.push(c);
        rest = &rest[..rest.len() - c.len_utf8()];
    }

    if !rest.is_empty() {
        split_clitic(rest, out);
    }
    out.extend(trailing.into_iter().rev().map(String::from));
}

fn split_clitic(core: &str, out: &mut Vec<String>) {
    // The stem goes back through the word splitter so that the output is
    // stable under re-tokenization.
    if core.len() > NEGATION.len() && core.ends_with(NEGATION) {
        split_word(&core[..core.len() - NEGATION.len()], out);
        out.push(NEGATION.to_string());
        return;
    }
    if let Some(pos) = core.rfind('\'') {
        if pos > 0 && CLITICS.contains(&&core[pos..]) {
            split_word(&core[..pos], out);
            out.push(core[pos..].to_string());
            return;
        }
    }
    out.push(core.to_string());
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn punctuation_is_split() {
        assert_eq!(toks("Hello, world!"), ["hello", ",", "world", "!"]);
        assert_eq!(toks("(wait...)"), ["(", "wait", ".", ".", ".", ")"]);
    }

    #[test]
    fn contractions() {
        assert_eq!(toks("don't"), ["do", "n't"]);
        assert_eq!(toks("Can't"), ["ca", "n't"]);
        assert_eq!(toks("the cat's toy"), ["the", "cat", "'s", "toy"]);
        assert_eq!(toks("they're here"), ["they", "'re", "here"]);
        assert_eq!(toks("rock'n'roll"), ["rock'n'roll"]);
        assert_eq!(toks("'quoted'"), ["'", "quoted", "'"]);
    }

    #[test]
    fn urls_collapse() {
        assert_eq!(toks("see http://x.co now"), ["see", "<url>", "now"]);
        assert_eq!(toks("(https://a.b/c?d=1)."), ["(", "<url>", ")", "."]);
        assert_eq!(toks("www.example.com"), ["<url>"]);
    }

    #[test]
    fn empty_and_internal_punctuation() {
        assert!(toks("").is_empty());
        assert!(toks("   \n\t").is_empty());
        assert_eq!(toks("e.g. well-known"), ["e.g", ".", "well-known"]);
    }

    proptest! {
        #[test]
        fn retokenizing_is_a_fixed_point(s in "\\PC{0,60}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.iter().all(|t| !t.is_empty()));
        }

        #[test]
        fn retokenizing_wordlike_text_is_a_fixed_point(s in "[a-zA-Z' .,!?()n:/]{0,60}") {
            let once = tokenize(&s);
            prop_assert_eq!(&once, &tokenize(&once.join(" ")));
        }
    }
}
