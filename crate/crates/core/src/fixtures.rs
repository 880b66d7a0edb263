//! Node lists of the three published test maps: the 14-node clinical
//! depression map, its six-node strongly connected subset, and the 8-node
//! celiac disease classifier. Each table gives the target labels and the
//! labels recovered from the detailed and the edited summaries.

pub struct NodeTable {
    pub name: &'static str,
    pub target: &'static [&'static str],
    pub from_latent_i: &'static [&'static str],
    pub from_latent_ii: &'static [&'static str],
}

pub const DEPRESSION: NodeTable = NodeTable {
    name: "depression",
    target: &[
        "Psychomotor agitation",
        "Psychomotor retardation",
        "Depressive mood",
        "Reduced interest for daily function",
        "Insomnia",
        "Hypersomnia",
        "Fatigue or loss of energy",
        "Recurrent thoughts of death",
        "Loss of appetite",
        "Diminished ability to think or concentrate",
        "Indecisiveness",
        "Feelings of worthlessness",
        "Extreme self-criticism",
        "Depression",
    ],
    from_latent_i: &[
        "Psychomotor agitation",
        "Psychomotor retardation",
        "Depressive mood",
        "Reduced interest for daily function",
        "Insomnia",
        "Hypersomnia",
        "Fatigue or loss of energy",
        "Recurrent thoughts of death",
        "Loss of appetite",
        "Diminished ability to think or concentrate",
        "Indecisiveness",
        "Feelings of worthlessness",
        "Extreme self-criticism",
        "Depression",
    ],
    from_latent_ii: &[
        "Psychomotor agitation",
        "Psychomotor retardation",
        "Depressive mood",
        "Interest for daily function",
        "Insomnia",
        "Hypersomnia",
        "Fatigue or loss of energy",
        "Thoughts of death",
        "Appetite",
        "Concentration",
        "Indecisiveness",
        "Worthlessness",
        "Self-criticism",
        "Depression",
    ],
};

/// Original 1-based indices of the subset's nodes in [`DEPRESSION`].
pub const DEPRESSION_SUBSET_INDICES: [usize; 6] = [2, 3, 7, 12, 13, 14];

pub const DEPRESSION_SUBSET: NodeTable = NodeTable {
    name: "depression-subset",
    target: &[
        "Psychomotor retardation",
        "Depressive mood",
        "Fatigue or loss of energy",
        "Feelings of worthlessness",
        "Extreme self-criticism",
        "Depression",
    ],
    from_latent_i: &[
        "Psychomotor retardation",
        "Depressive mood",
        "Fatigue or loss of energy",
        "Feelings of worthlessness",
        "Extreme self-criticism",
        "Depression",
    ],
    from_latent_ii: &[
        "Psychomotor retardation",
        "Depressive mood",
        "Fatigue or loss of energy",
        "Feelings of worthlessness",
        "Extreme self-criticism",
        "Depression",
    ],
};

pub const CELIAC: NodeTable = NodeTable {
    name: "celiac",
    target: &[
        "Villi blunting",
        "Crypt hyperplasia",
        "Intraepithelial lymphocyte infiltration",
        "Epithelial changes",
        "Lamina propria MNC infiltration",
        "Decrescendo pattern",
        "Mitoses",
        "Class of celiac",
    ],
    from_latent_i: &[
        "Villi blunting",
        "Crypt hyperplasia",
        "Intraepithelial lymphocyte infiltration",
        "Epithelial changes",
        "Lamina propria MNC infiltration",
        "Decrescendo pattern",
        "Mitoses",
        "Class of celiac",
    ],
    from_latent_ii: &[
        "Villous blunting",
        "Crypt hyperplasia",
        "Intraepithelial lymphocyte infiltration",
        "Epithelial changes",
        "Lamina propria inflammation",
        "Decrescendo pattern",
        "Mitotic activity",
        "Classification of celiac",
    ],
};

pub const ALL: [&NodeTable; 3] = [&DEPRESSION, &DEPRESSION_SUBSET, &CELIAC];

/// Sentence from the detailed summary of the depression map describing the
/// edges out of "loss of appetite".
pub const LATENT_I_APPETITE: &str = "'Loss of appetite' strongly causes 'fatigue or loss of energy' and significantly increases 'psychomotor retardation' and 'reduced interest for daily functioning'.";

/// The same content after the naturalness rewrite, with the emphasized node
/// words set in quotes.
pub const LATENT_II_APPETITE: &str = "Even a loss of 'appetite' contributes to the cycle by strongly causing 'fatigue' and significantly increasing 'psychomotor retardation' and a loss of 'interest in daily activities'.";
