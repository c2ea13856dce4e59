//! The manual-review decision rule: a sampled error rate above 10%
//! requires hand-filtering the whole candidate pool.

use super::extract::CandidateRecord;
use super::PipelineError;

pub const HAND_FILTER_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReviewVerdict {
    HandFilterRequired,
    AcceptRemainder,
}

#[derive(Debug, Clone)]
pub struct ReviewAdvisory {
    pub verdict: ReviewVerdict,
    pub candidates: usize,
    pub sample_size: usize,
    pub error_rate: f64,
    pub message: String,
}

/// Summarises a human-reviewed sample of the candidate pool.
pub fn review_summary(
    candidates: &[CandidateRecord],
    sample_size: usize,
    error_rate: f64,
) -> Result<ReviewAdvisory, PipelineError> {
    if sample_size == 0 {
        return Err(PipelineError::EmptySample);
    }
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(PipelineError::BadErrorRate(error_rate));
    }
    let verdict = if error_rate > HAND_FILTER_THRESHOLD {
        ReviewVerdict::HandFilterRequired
    } else {
        ReviewVerdict::AcceptRemainder
    };
    let message = match verdict {
        ReviewVerdict::HandFilterRequired => format!(
            "sampled error rate {:.1}% exceeds {:.0}%: hand-filter all {} candidates",
            error_rate * 100.0,
            HAND_FILTER_THRESHOLD * 100.0,
            candidates.len()
        ),
        ReviewVerdict::AcceptRemainder => format!(
            "sampled error rate {:.1}% is within {:.0}%: accept the remaining {} candidates",
            error_rate * 100.0,
            HAND_FILTER_THRESHOLD * 100.0,
            candidates.len()
        ),
    };
    Ok(ReviewAdvisory {
        verdict,
        candidates: candidates.len(),
        sample_size,
        error_rate,
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_decisions() {
        let a = review_summary(&[], 50, 0.12).unwrap();
        assert_eq!(a.verdict, ReviewVerdict::HandFilterRequired);
        let b = review_summary(&[], 50, 0.0).unwrap();
        assert_eq!(b.verdict, ReviewVerdict::AcceptRemainder);
        // Exactly 10% does not trigger hand filtering.
        let c = review_summary(&[], 50, 0.10).unwrap();
        assert_eq!(c.verdict, ReviewVerdict::AcceptRemainder);
    }

    #[test]
    fn zero_sample_is_error() {
        assert!(matches!(
            review_summary(&[], 0, 0.5),
            Err(PipelineError::EmptySample)
        ));
    }
}
