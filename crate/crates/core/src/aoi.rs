//! AOI encoding of fixations and segmentation by assessment phase.

use crate::gaze_events::{Fixation, Phase};
use crate::ingest::{AoiLayout, SessionTimeline};

/// Id of the most specific region on `current_page` containing the
/// fixation centroid. Lines beat the page that encloses them, questions beat
/// the quiz panel.
pub fn assign_aoi(fixation: &Fixation, layout: &AoiLayout, current_page: u32) -> Option<String> {
    layout
        .regions()
        .iter()
        .filter(|r| r.visible_on(current_page) && r.bbox.contains(fixation.cx_px, fixation.cy_px))
        .min_by_key(|r| r.kind.specificity_rank())
        .map(|r| r.id.clone())
}

/// Fills `aoi_id` on every fixation, using the timeline's page events to
/// decide which passage page was on screen at the fixation midpoint.
pub fn encode_fixations(fixations: &mut [Fixation], layout: &AoiLayout, timeline: &SessionTimeline) {
    for f in fixations.iter_mut() {
        let page = timeline.page_at(f.midpoint_s());
        f.aoi_id = assign_aoi(f, layout, page);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseSegments {
    pub cold_read: Vec<Fixation>,
    pub qa: Vec<Fixation>,
    /// Fixations whose midpoint falls outside both phases.
    pub dropped: usize,
}

impl PhaseSegments {
    pub fn get(&self, phase: Phase) -> &[Fixation] {
        match phase {
            Phase::ColdRead => &self.cold_read,
            Phase::Qa => &self.qa,
        }
    }
}

pub fn phase_of(fixation: &Fixation, timeline: &SessionTimeline) -> Option<Phase> {
    let mid = fixation.midpoint_s();
    if timeline.cold_read.contains(mid) {
        Some(Phase::ColdRead)
    } else if timeline.qa.contains(mid) {
        Some(Phase::Qa)
    } else {
        None
    }
}

/// Splits fixations by the phase containing their midpoint. The returned
/// fixations carry their `phase`.
pub fn segment_by_phase(fixations: &[Fixation], timeline: &SessionTimeline) -> PhaseSegments {
    let mut seg = PhaseSegments::default();
    for f in fixations {
        match phase_of(f, timeline) {
            Some(p) => {
                let mut f = f.clone();
                f.phase = Some(p);
                match p {
                    Phase::ColdRead => seg.cold_read.push(f),
                    Phase::Qa => seg.qa.push(f),
                }
            }
            None => seg.dropped += 1,
        }
    }
    seg
}

/// Groups fixations that already carry a `phase` (e.g. read back from a
/// fixation export).
pub fn group_by_recorded_phase(fixations: &[Fixation]) -> PhaseSegments {
    let mut seg = PhaseSegments::default();
    for f in fixations {
        match f.phase {
            Some(Phase::ColdRead) => seg.cold_read.push(f.clone()),
            Some(Phase::Qa) => seg.qa.push(f.clone()),
            None => seg.dropped += 1,
        }
    }
    seg
}
