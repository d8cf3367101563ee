//! Refusal citations: operation or query row plus its hardness verdict.

pub const SUM: &str = "sum: NP-hard for Det out";
pub const PRODUCT: &str = "product: #P-hard w/o Cmp";
pub const POWER_NATURAL: &str = "power (natural): #P-hard w/o SD";
pub const POWER_REAL: &str = "power (real): #P-hard w/o Det";
pub const QUOTIENT: &str = "quotient: #P-hard w/o Det";
pub const LOG: &str = "log: #P-hard w/o Det";
pub const EXP: &str = "exp: #P-hard";
pub const CROSS_ENTROPY: &str = "cross entropy: #P-hard w/o Det";
pub const ENTROPY: &str = "Shannon entropy: coNP-hard w/o Det";
pub const RENYI_NATURAL: &str = "Renyi entropy (natural): #P-hard w/o SD";
pub const RENYI_REAL: &str = "Renyi entropy (real): #P-hard w/o Det";
pub const MI: &str = "mutual information: coNP-Hard w/o SD";
pub const KLD: &str = "KL divergence: #P-hard w/o Det";
pub const ALPHA_NATURAL: &str = "alpha divergence (natural): #P-Hard w/o Det";
pub const ALPHA_REAL: &str = "alpha divergence (real): #P-Hard w/o Det";
pub const IS: &str = "Itakura-Saito: #P-Hard w/o Det";
pub const CS: &str = "Cauchy-Schwarz: #P-Hard w/o Cmp";
pub const SL: &str = "squared loss: #P-Hard w/o Cmp";
pub const INTEGRATION: &str = "integration: no tractability guarantee w/o Sm, Dec";
pub const SUPPORT: &str = "support: no tractability guarantee w/o Det";
