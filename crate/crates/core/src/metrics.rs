use crate::error::{Error, Result};

/// `(TPR + TNR) / 2` with outliers (`true`) as the positive class.
pub fn balanced_accuracy(labels: &[bool], flags: &[bool]) -> Result<f64> {
    if labels.len() != flags.len() {
        return Err(Error::Dimension {
            what: "flag count",
            expected: labels.len(),
            got: flags.len(),
        });
    }
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&l, &f) in labels.iter().zip(flags) {
        if l {
            pos += 1;
            tp += f as usize;
        } else {
            neg += 1;
            tn += !f as usize;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok(0.5 * (tp as f64 / pos as f64 + tn as f64 / neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let labels = [true, true, false, false];
        assert_eq!(balanced_accuracy(&labels, &labels).unwrap(), 1.0);
        assert_eq!(balanced_accuracy(&labels, &[false; 4]).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&labels, &[true, false, false, false]).unwrap(), 0.75);
    }

    #[test]
    fn errors() {
        assert_eq!(balanced_accuracy(&[false, false], &[true, false]), Err(Error::SingleClass));
        assert!(balanced_accuracy(&[true], &[]).is_err());
    }

    #[test]
    fn symmetric_under_class_swap() {
        let labels = [true, false, false, true, false];
        let flags = [true, true, false, false, false];
        let neg = |v: &[bool]| v.iter().map(|b| !b).collect::<alloc::vec::Vec<_>>();
        let a = balanced_accuracy(&labels, &flags).unwrap();
        let b = balanced_accuracy(&neg(&labels), &neg(&flags)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}
