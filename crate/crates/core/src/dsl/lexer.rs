use super::{Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Arrow,
    Le,
    Eq,
    Dot,
    At,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Dot => "`.`".into(),
            Tok::At => "`@`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub fn is_bare_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '*'
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\r' || c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(Diagnostic::new(pos, "unterminated quoted identifier", "close the identifier with `\"`"))
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        match chars.get(i) {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                bump!();
                            }
                            _ => {
                                return Err(Diagnostic::new(
                                    Pos { line, col },
                                    "unknown escape in quoted identifier",
                                    "only `\\\"` and `\\\\` are escapes",
                                ))
                            }
                        }
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        if is_bare_char(c) {
            let mut s = String::new();
            while i < chars.len() && is_bare_char(chars[i]) {
                s.push(chars[i]);
                bump!();
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok = match two.as_str() {
            "->" => Some(Tok::Arrow),
            "<=" => Some(Tok::Le),
            _ => None,
        };
        if let Some(t) = tok {
            bump!();
            bump!();
            out.push((t, pos));
            continue;
        }
        let t = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '.' => Tok::Dot,
            '@' => Tok::At,
            _ => {
                return Err(Diagnostic::new(
                    pos,
                    format!("unexpected character `{c}`"),
                    "identifiers with unusual characters must be quoted, as in \"g.f\"",
                ))
            }
        };
        bump!();
        out.push((t, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
