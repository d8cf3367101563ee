/// Row name, exponent substituted for `n` or `a`, tractable pipeline, pipeline with one condition removed.
pub const GOLDEN: &[(&str, &str, &str, &str)] = &[
    ("sum", "", "p:sd; q:sd; cmp(p,q); add(p,q)", "p:det; q:det; cmp(p,q); log(add(p,q))"),
    ("product", "", "p:sd; q:sd; cmp(p,q); mul(p,q)", "p:sd; q:sd; mul(p,q)"),
    ("power (natural)", "3", "p:sd; pow(p,3)", "p:sm,dec; pow(p,3)"),
    ("power (real)", "", "p:det; pow(p,0.5)", "p:sd; pow(p,0.5)"),
    ("quotient", "", "p:det,sd; q:det,sd; cmp(p,q); div(p,q)", "p:sd; q:sd; cmp(p,q); div(p,q)"),
    ("log", "", "p:det; log(p)", "p:sd; log(p)"),
    ("exp", "", "p:lin; exp(p)", "p:sd; exp(p)"),
    ("cross entropy", "", "p:sd; q:det,sd; cmp(p,q); xent(p,q)", "p:sd; q:sd; cmp(p,q); xent(p,q)"),
    ("Shannon entropy", "", "p:det; entropy(p)", "p:sd; entropy(p)"),
    ("Renyi entropy (natural)", "3", "p:sd; renyi(p,3)", "p:sm,dec; renyi(p,3)"),
    ("Renyi entropy (real)", "", "p:det; renyi(p,0.5)", "p:sd; renyi(p,0.5)"),
    ("mutual information", "", "p:det,sd; mdet(p;2,3); mdet(p;1); mi(p;1;2,3)", "p:det,sd; mi(p;1;2,3)"),
    ("KL divergence", "", "p:det,sd; q:det,sd; cmp(p,q); kld(p,q)", "p:sd; q:det,sd; cmp(p,q); kld(p,q)"),
    ("alpha divergence (natural)", "2", "p:sd; q:det,sd; cmp(p,q); alpha(p,q,2)", "p:sd; q:sd; cmp(p,q); alpha(p,q,2)"),
    (
        "alpha divergence (real)",
        "",
        "p:det,sd; q:det,sd; cmp(p,q); alpha(p,q,0.5)",
        "p:sd; q:det,sd; cmp(p,q); alpha(p,q,0.5)",
    ),
    ("Itakura-Saito", "", "p:det,sd; q:det,sd; cmp(p,q); is(p,q)", "p:sd; q:det,sd; cmp(p,q); is(p,q)"),
    ("Cauchy-Schwarz", "", "p:sd; q:sd; cmp(p,q); cs(p,q)", "p:sd; q:sd; cs(p,q)"),
    ("squared loss", "", "p:sd; q:sd; cmp(p,q); sl(p,q)", "p:sd; q:sd; sl(p,q)"),
];
