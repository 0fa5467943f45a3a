//! Words: canonical labelings of the match partition of a circuit.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{arg_err, Error, Result};

/// Largest length accepted by [`enumerate_pair_matched`].
pub const MAX_ENUMERATION_LENGTH: usize = 16;

/// A word in canonical form: letters are `1, 2, ...` and the first occurrence
/// of letter `k` precedes the first occurrence of letter `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<u8>,
}

impl Word {
    /// Canonical letters, 1-based values.
    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `|w|`, the number of distinct letters.
    pub fn num_letters(&self) -> usize {
        self.letters.iter().copied().max().unwrap_or(0) as usize
    }

    /// Every letter appears exactly twice.
    pub fn is_pair_matched(&self) -> bool {
        let mut counts = vec![0u8; self.num_letters() + 1];
        for &l in &self.letters {
            counts[l as usize] = counts[l as usize].saturating_add(1);
        }
        counts[1..].iter().all(|&c| c == 2)
    }

    /// For each 1-based position `i` (index `i - 1`), the 1-based position of
    /// the first occurrence of the same letter, or `None` if `i` is itself a
    /// first occurrence.
    pub fn first_occurrences(&self) -> Vec<Option<usize>> {
        let mut first = vec![0usize; self.num_letters() + 1];
        self.letters
            .iter()
            .enumerate()
            .map(|(idx, &l)| {
                if first[l as usize] == 0 {
                    first[l as usize] = idx + 1;
                    None
                } else {
                    Some(first[l as usize])
                }
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.letters {
            if l <= 26 {
                write!(f, "{}", (b'a' + l - 1) as char)?;
            } else {
                write!(f, "[{l}]")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses any string of symbols and canonicalizes it (`"baab"` gives `abba`).
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        canonicalize(&chars)
    }
}

/// Relabels `raw` so that letters appear in order of first occurrence.
pub fn canonicalize<T: PartialEq>(raw: &[T]) -> Result<Word> {
    if raw.is_empty() {
        return Err(arg_err!("cannot canonicalize an empty word"));
    }
    let mut seen: Vec<&T> = Vec::new();
    let mut letters = Vec::with_capacity(raw.len());
    for sym in raw {
        let label = match seen.iter().position(|s| *s == sym) {
            Some(p) => p + 1,
            None => {
                seen.push(sym);
                seen.len()
            }
        };
        if label > u8::MAX as usize {
            return Err(arg_err!("more than {} distinct letters", u8::MAX));
        }
        letters.push(label as u8);
    }
    Ok(Word { letters })
}

/// All pair-matched words of length `h`, sorted, without duplicates.
pub fn enumerate_pair_matched(h: usize) -> Result<Vec<Word>> {
    if h == 0 || h % 2 == 1 {
        return Err(arg_err!("pair-matched words need a positive even length, got {h}"));
    }
    if h > MAX_ENUMERATION_LENGTH {
        return Err(arg_err!("length {h} exceeds enumeration bound {MAX_ENUMERATION_LENGTH}"));
    }
    let mut out = Vec::new();
    let mut buf = vec![0u8; h];
    fill_pairs(&mut buf, 1, &mut out);
    out.sort();
    Ok(out)
}

fn fill_pairs(buf: &mut [u8], next: u8, out: &mut Vec<Word>) {
    let Some(first) = buf.iter().position(|&l| l == 0) else {
        out.push(Word { letters: buf.to_vec() });
        return;
    };
    buf[first] = next;
    for partner in first + 1..buf.len() {
        if buf[partner] == 0 {
            buf[partner] = next;
            fill_pairs(buf, next + 1, out);
            buf[partner] = 0;
        }
    }
    buf[first] = 0;
}

/// A pair-matched word is Catalan iff its pairing is non-crossing, which is
/// what repeated deletion of adjacent double letters tests.
pub fn is_catalan(w: &Word) -> Result<bool> {
    if !w.is_pair_matched() {
        return Err(arg_err!("`{w}` is not pair-matched"));
    }
    let mut open = vec![false; w.num_letters() + 1];
    let mut stack: Vec<u8> = Vec::with_capacity(w.len() / 2);
    for &l in w.letters() {
        if open[l as usize] {
            if stack.pop() != Some(l) {
                return Ok(false);
            }
        } else {
            open[l as usize] = true;
            stack.push(l);
        }
    }
    Ok(stack.is_empty())
}

/// `{0} ∪ {i : w[i] is a first occurrence}`, positions 1-based, sorted.
pub fn generating_positions(w: &Word) -> Vec<usize> {
    let mut out = vec![0];
    out.extend(w.first_occurrences().iter().enumerate().filter(|(_, f)| f.is_none()).map(|(idx, _)| idx + 1));
    out
}

/// Renders words as a comma-separated string.
pub fn join(words: &[Word]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{w}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(w("baab").to_string(), "abba");
        assert_eq!(w("abab").to_string(), "abab");
        assert_eq!(w("ccdd").to_string(), "aabb");
        assert_eq!(canonicalize(&[7, 7, 3, 3]).unwrap(), w("aabb"));
        assert!(canonicalize::<u8>(&[]).is_err());
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(join(&enumerate_pair_matched(2).unwrap()), "aa");
        assert_eq!(join(&enumerate_pair_matched(4).unwrap()), "aabb,abab,abba");
        assert_eq!(enumerate_pair_matched(6).unwrap().len(), 15);
        assert!(enumerate_pair_matched(3).is_err());
        assert!(enumerate_pair_matched(18).is_err());
    }

    #[test]
    fn catalan_examples() {
        for s in ["abba", "aabbcc", "abccbdda"] {
            assert!(is_catalan(&w(s)).unwrap(), "{s}");
        }
        for s in ["abab", "abccab", "abcddcab"] {
            assert!(!is_catalan(&w(s)).unwrap(), "{s}");
        }
        assert!(is_catalan(&w("aab")).is_err());
        let six = enumerate_pair_matched(6).unwrap();
        assert_eq!(six.iter().filter(|x| is_catalan(x).unwrap()).count(), 5);
    }

    #[test]
    fn generating_examples() {
        assert_eq!(generating_positions(&w("abbcab")), [0, 1, 2, 4]);
        assert_eq!(generating_positions(&w("aa")), [0, 1]);
        assert_eq!(generating_positions(&w("abab")), [0, 1, 2]);
    }

    #[test]
    fn first_occurrence_map() {
        assert_eq!(w("abba").first_occurrences(), [None, None, Some(2), Some(1)]);
    }
}
