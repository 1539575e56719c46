const URL_MARKERS: [&str; 3] = ["http://", "https://", "www."];

/// Removes `@USER`/`URL` placeholders, mentions, hashtags and links, and
/// collapses whitespace.
pub fn strip_noise(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        if token == "@USER" || token == "URL" || token.starts_with('@') || token.starts_with('#') {
            continue;
        }
        let cut = URL_MARKERS
            .iter()
            .filter_map(|m| token.find(m))
            .min()
            .unwrap_or(token.len());
        let kept = &token[..cut];
        if kept.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(kept);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders() {
        assert_eq!(strip_noise("@USER you suck URL"), "you suck");
        assert_eq!(strip_noise(""), "");
    }

    #[test]
    fn handles_hashtags_links() {
        assert_eq!(strip_noise("see https://t.co/abc #mean @bob now"), "see now");
        assert_eq!(strip_noise("go to www.example.com please"), "go to please");
        assert_eq!(strip_noise("link:http://x.y done"), "link: done");
    }

    #[test]
    fn collapses_whitespace() {
        assert_eq!(strip_noise("  a \t\n b  "), "a b");
    }

    #[test]
    fn keeps_inner_symbols() {
        assert_eq!(strip_noise("me@home is#1"), "me@home is#1");
    }
}
