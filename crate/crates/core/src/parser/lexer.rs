use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Open,
    Close,
    Symbol,
    /// `?name`
    Variable,
    /// `:name`
    Keyword,
}

/// A lexeme with its 1-based source position. `text` is the verbatim
/// source slice; case folding happens where the parser interprets it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    /// Lower-cased text, used for predicate heads and keywords.
    pub fn folded(&self) -> String {
        self.text.to_ascii_lowercase()
    }
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '+' | '*' | '/' | '<' | '>' | '=' | '!')
}

/// Splits BDDL source into tokens. `;` starts a comment running to end of line.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' | ')' => {
                chars.next();
                tokens.push(Token {
                    kind: if c == '(' { TokenKind::Open } else { TokenKind::Close },
                    text: c.to_string(),
                    line,
                    column,
                });
                column += 1;
            }
            c if c == '?' || c == ':' || is_symbol_char(c) => {
                let start = column;
                let kind = match c {
                    '?' => TokenKind::Variable,
                    ':' => TokenKind::Keyword,
                    _ => TokenKind::Symbol,
                };
                let mut text = String::new();
                text.push(c);
                chars.next();
                column += 1;
                while let Some(&n) = chars.peek() {
                    if is_symbol_char(n) {
                        text.push(n);
                        chars.next();
                        column += 1;
                    } else if n == '(' || n == ')' || n == ';' || n.is_whitespace() {
                        break;
                    } else {
                        return Err(ParseError::IllegalCharacter { line, column });
                    }
                }
                if kind != TokenKind::Symbol && text.len() == 1 {
                    // a bare '?' or ':' names nothing
                    return Err(ParseError::IllegalCharacter { line, column: start });
                }
                tokens.push(Token { kind, text, line, column: start });
            }
            _ => return Err(ParseError::IllegalCharacter { line, column }),
        }
    }
    Ok(tokens)
}
