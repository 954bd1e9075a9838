//! `surface_TAG` pre-tagged text: tokens separated by spaces, sequences by
//! blank lines.

use std::io::{BufRead, Write};

use super::{TagSet, Token};
use crate::error::{Error, Result};

/// Reads pre-tagged sequences, validating every tag against `tagset`.
/// Surfaces are lowercased.
pub fn read_pretagged<R: BufRead>(reader: R, tagset: &TagSet) -> Result<Vec<Vec<Token>>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            continue;
        }
        for item in line.split_whitespace() {
            let (surface, tag) = item.rsplit_once('_').filter(|(s, _)| !s.is_empty()).ok_or_else(|| {
                Error::InvalidArgument(format!("line {lineno}: {item:?} is not surface_TAG"))
            })?;
            let tag = tagset.get(tag).ok_or_else(|| Error::UnknownTag {
                tag: tag.to_string(),
                line: Some(lineno),
            })?;
            current.push(Token::new(surface.to_lowercase(), Some(tag)));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

/// Writes sequences in the same format; untagged tokens are an error.
pub fn write_pretagged<W: Write>(mut w: W, seqs: &[Vec<Token>], tagset: &TagSet) -> Result<()> {
    for seq in seqs {
        let mut first = true;
        for tok in seq {
            let tag = tok.tag.ok_or_else(|| Error::Untagged {
                surface: tok.surface.clone(),
            })?;
            if !first {
                w.write_all(b" ")?;
            }
            first = false;
            write!(w, "{}_{}", tok.surface, tagset.name(tag))?;
        }
        w.write_all(b"\n\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_pairs_and_boundaries() {
        let ts = TagSet::default();
        let seqs = read_pretagged("the_DT cat_NN\n\n\nsat_VBD ._.\n".as_bytes(), &ts).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0][0], Token::new("the", ts.get("DT")));
        assert_eq!(seqs[0][1], Token::new("cat", ts.get("NN")));
        assert_eq!(seqs[1][1], Token::new(".", ts.get(".")));
    }

    #[test]
    fn unknown_tag_names_tag_and_line() {
        let ts = TagSet::default();
        let err = read_pretagged("the_DT\n\ncat_XX\n".as_bytes(), &ts).unwrap_err();
        assert!(matches!(err, Error::UnknownTag { ref tag, line: Some(3) } if tag == "XX"));
        assert!(err.to_string().contains("XX"));
    }

    #[test]
    fn round_trip() {
        let ts = TagSet::default();
        let text = "my_PRP$ dog_NN_NN 's_POS\n\nok_UH\n\n";
        let seqs = read_pretagged(text.as_bytes(), &ts).unwrap();
        assert_eq!(seqs[0][1].surface, "dog_nn");
        let mut buf = Vec::new();
        write_pretagged(&mut buf, &seqs, &ts).unwrap();
        assert_eq!(read_pretagged(buf.as_slice(), &ts).unwrap(), seqs);
    }
}
