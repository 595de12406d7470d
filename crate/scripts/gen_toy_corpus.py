#!/usr/bin/env python3
"""Regenerates the bundled toy corpus in crates/core/data/.

Sentences are short, topic-structured, scripture-flavoured English. Each
sentence draws most of its content words from one of six themes, plus a few
shared words and common function words (which the stopword filter removes).
Output is fully determined by SEED.
"""

import random
from pathlib import Path

SEED = 20140601
N_TRAIN = 500
N_TEST = 100

THEMES = {
    "pasture": [
        "shepherd", "flock", "sheep", "lamb", "pasture", "field", "goat",
        "wolf", "valley", "meadow", "herd", "ram", "fold", "grass", "brook",
        "staff", "cattle", "stray", "graze", "wander", "hill", "ewe",
        "tent", "dust",
    ],
    "kingdom": [
        "king", "throne", "crown", "servant", "prince", "palace", "army",
        "sword", "battle", "enemy", "reign", "chariot", "captain", "judge",
        "nation", "law", "gold", "silver", "tribute", "council", "spear",
        "horse", "banner", "queen",
    ],
    "sea": [
        "ship", "sea", "fish", "net", "boat", "storm", "wave", "shore",
        "sail", "wind", "deep", "harbor", "fisher", "oar", "island", "tide",
        "anchor", "salt", "whale", "rock", "sand", "cloud", "thunder",
        "mast",
    ],
    "temple": [
        "priest", "altar", "offer", "incense", "temple", "prayer", "holy",
        "sacred", "lamp", "oil", "veil", "psalm", "choir", "feast", "blood",
        "bull", "fire", "smoke", "court", "pillar", "bread", "cup", "robe",
        "candle",
    ],
    "harvest": [
        "wheat", "vine", "grape", "harvest", "barley", "seed", "sow", "reap",
        "plough", "olive", "fig", "orchard", "garden", "root", "branch",
        "fruit", "rain", "soil", "granary", "thresh", "sickle", "basket",
        "honey", "tree",
    ],
    "journey": [
        "road", "city", "gate", "journey", "camel", "desert", "caravan",
        "stranger", "inn", "market", "wall", "tower", "path", "bridge",
        "guide", "border", "mountain", "river", "donkey", "cart", "lantern",
        "travel", "north", "south",
    ],
}

SHARED = [
    "lord", "people", "son", "father", "mother", "house", "day", "night",
    "heart", "word", "hand", "voice",
]

# Subset of the shipped stopword list, interleaved to mimic natural text.
FUNCTION = [
    "the", "and", "of", "in", "to", "a", "was", "he", "they", "with", "for",
    "his", "their", "all", "on", "from", "by", "at", "then", "there",
    "were", "had", "is", "it", "them", "into",
]


def sentence(rng: random.Random) -> str:
    theme = rng.choice(list(THEMES))
    # Rarely mix a second theme in so clusters are not perfectly separable.
    second = rng.choice(list(THEMES)) if rng.random() < 0.15 else None
    n_content = rng.randint(3, 7)
    words = []
    for _ in range(n_content):
        r = rng.random()
        if r < 0.78:
            words.append(rng.choice(THEMES[theme]))
        elif r < 0.90 and second is not None:
            words.append(rng.choice(THEMES[second]))
        else:
            words.append(rng.choice(SHARED))
    # Occasional repeated term so count vectors are not purely binary.
    if rng.random() < 0.2:
        words.append(rng.choice(words))
    out = []
    for w in words:
        for _ in range(rng.randint(0, 2)):
            out.append(rng.choice(FUNCTION))
        out.append(w)
    text = " ".join(out)
    text = text[0].upper() + text[1:]
    if rng.random() < 0.05:
        text += " " + str(rng.randint(1, 150))
    return text + rng.choice([".", ".", ".", ";", ":", "!"])


def main() -> None:
    rng = random.Random(SEED)
    data = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"
    data.mkdir(parents=True, exist_ok=True)
    train = [sentence(rng) for _ in range(N_TRAIN)]
    test = [sentence(rng) for _ in range(N_TEST)]
    (data / "toy_train.txt").write_text("\n".join(train) + "\n")
    (data / "toy_test.txt").write_text("\n".join(test) + "\n")


if __name__ == "__main__":
    main()
