use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier: variables and method names.
    Lower(String),
    /// Uppercase-initial identifier: nominal types, aliases, type variables.
    Upper(String),
    Wild,
    Num(u64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::Wild => f.write_str("`_`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

// Longest first so that `->` wins over `-` and `<|` over `<`.
const SYMBOLS: &[&str] = &[
    "\\/", "->", "<|", "<:", "=>", "{", "}", "[", "]", "(", ")", "<", ">", ",", ";", ":", ".", "=", "!",
];

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if word == "_" {
                Tok::Wild
            } else if word.starts_with('_') {
                return Err(err(sl, sc, format!("identifiers may not start with `_`: {word}")));
            } else if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            };
            out.push(Token { tok, line: sl, col: sc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let n = word.parse::<u64>().map_err(|e| err(sl, sc, format!("bad numeral: {e}")))?;
            out.push(Token { tok: Tok::Num(n), line: sl, col: sc });
            continue;
        }
        if c == '"' {
            i += 1;
            col += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(sl, sc, "unterminated string".into())),
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some(ch) => {
                        s.push(*ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: sl, col: sc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line: sl, col: sc });
            }
            None => return Err(err(sl, sc, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_prefer_longest() {
        let toks: Vec<Tok> = lex("a -> <| <: \\/ < =>").unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Lower("a".into()),
                Tok::Sym("->"),
                Tok::Sym("<|"),
                Tok::Sym("<:"),
                Tok::Sym("\\/"),
                Tok::Sym("<"),
                Tok::Sym("=>"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = lex("// hi\n  Foo \"1\"").unwrap();
        assert_eq!((toks[0].line, toks[0].col), (2, 3));
        assert_eq!(toks[1].tok, Tok::Str("1".into()));
    }

    #[test]
    fn leading_underscore_names_are_reserved() {
        assert!(lex("_x").is_err());
        assert_eq!(lex("_").unwrap()[0].tok, Tok::Wild);
    }
}
