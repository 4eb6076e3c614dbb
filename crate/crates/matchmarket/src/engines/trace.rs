use crate::market::{ApplicantId, MarketInstance, ProgramId};

/// One engine step. Rendered as a single line per event, so a trace file is
/// line-delimited and byte-deterministic for a given input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Propose {
        applicant: ApplicantId,
        program: ProgramId,
    },
    ProgramPropose {
        program: ProgramId,
        applicant: ApplicantId,
    },
    Hold {
        program: ProgramId,
        applicant: ApplicantId,
    },
    Reject {
        program: ProgramId,
        applicant: ApplicantId,
    },
    Displace {
        program: ProgramId,
        out: ApplicantId,
        in_: ApplicantId,
    },
    ApplicantTradeUp {
        applicant: ApplicantId,
        out: ProgramId,
        in_: ProgramId,
    },
    PoolMatch {
        tier: u32,
        rank: u32,
        applicant: ApplicantId,
        program: ProgramId,
    },
}

impl TraceEvent {
    pub fn render(&self, market: &MarketInstance) -> String {
        let a = |id: ApplicantId| market.applicant_name(id).to_string();
        let p = |id: ProgramId| market.program_name(id).to_string();
        match *self {
            TraceEvent::Propose { applicant, program } => {
                format!("propose {} -> {}", a(applicant), p(program))
            }
            TraceEvent::ProgramPropose { program, applicant } => {
                format!("propose {} -> {}", p(program), a(applicant))
            }
            TraceEvent::Hold { program, applicant } => {
                format!("hold {} <- {}", p(program), a(applicant))
            }
            TraceEvent::Reject { program, applicant } => {
                format!("reject {} x {}", p(program), a(applicant))
            }
            TraceEvent::Displace { program, out, in_ } => {
                format!("displace {} -{} +{}", p(program), a(out), a(in_))
            }
            TraceEvent::ApplicantTradeUp {
                applicant,
                out,
                in_,
            } => {
                format!("trade-up {} -{} +{}", a(applicant), p(out), p(in_))
            }
            TraceEvent::PoolMatch {
                tier,
                rank,
                applicant,
                program,
            } => {
                format!(
                    "step ({tier},{rank}) match {} -> {}",
                    a(applicant),
                    p(program)
                )
            }
        }
    }
}

pub fn render_trace(market: &MarketInstance, events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for event in events {
        out.push_str(&event.render(market));
        out.push('\n');
    }
    out
}
