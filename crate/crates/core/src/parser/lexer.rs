use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Assign, // :=
    Dot,
    DotDot,
    Plus,
    Minus,
    Star,
    Bar2, // ||
    Amp2, // &&
    Bang,
    Question,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Arrow,    // ->
    FatArrow, // =>
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Bar2 => "||",
            Tok::Amp2 => "&&",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits the source into tokens. `//` starts a line comment. A few Unicode
/// operators are accepted as aliases (`∥ · ¬ ∧ ∨ → ⇒ ≠ ≤ ≥`).
pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        let (tline, tcol) = (line, col);
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
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tline, col: tcol });
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| Diagnostic {
                line: tline,
                col: tcol,
                message: format!("integer literal `{text}` is too large"),
            })?;
            push(&mut out, Tok::Int(v));
            continue;
        }
        let two = |a: char, b: char| c == a && next == Some(b);
        let (tok, width) = if two(':', '=') {
            (Tok::Assign, 2)
        } else if two('.', '.') {
            (Tok::DotDot, 2)
        } else if two('|', '|') {
            (Tok::Bar2, 2)
        } else if two('&', '&') {
            (Tok::Amp2, 2)
        } else if two('!', '=') {
            (Tok::Ne, 2)
        } else if two('<', '=') {
            (Tok::Le, 2)
        } else if two('>', '=') {
            (Tok::Ge, 2)
        } else if two('-', '>') {
            (Tok::Arrow, 2)
        } else if two('=', '>') {
            (Tok::FatArrow, 2)
        } else if two('=', '=') {
            (Tok::Eq, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '.' | '·' => Tok::Dot,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '!' | '¬' => Tok::Bang,
                '?' => Tok::Question,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '∥' => Tok::Bar2,
                '∧' => Tok::Amp2,
                '∨' => Tok::Bar2,
                '→' => Tok::Arrow,
                '⇒' => Tok::FatArrow,
                '≠' => Tok::Ne,
                '≤' => Tok::Le,
                '≥' => Tok::Ge,
                other => {
                    return Err(Diagnostic {
                        line: tline,
                        col: tcol,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            (t, 1)
        };
        i += width;
        col += width;
        push(&mut out, tok);
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
