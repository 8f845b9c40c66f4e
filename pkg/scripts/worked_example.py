"""Print super-trees, edit distance and alpha for the six-node example hierarchy."""

import argparse

from notesections.labeltree import soft_similarity, super_tree, tree_edit_distance
from notesections.synthetic import example_hierarchy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--labels-a", default="5,7")
    ap.add_argument("--labels-b", default="2,6")
    args = ap.parse_args()
    h = example_hierarchy()
    a = super_tree(h, args.labels_a.split(","))
    b = super_tree(h, args.labels_b.split(","))
    print("T_a:", a.nested())
    print("T_b:", b.nested())
    print("TED:", tree_edit_distance(a, b))
    print(f"alpha: {soft_similarity(a, b):.6f}")


if __name__ == "__main__":
    main()
