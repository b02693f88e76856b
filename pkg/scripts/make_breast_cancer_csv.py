"""Regenerate the vendored breast-cancer CSV from scikit-learn's bundled copy.

Dev utility; the package itself never imports sklearn.  Column layout:
30 numeric feature columns (original names, spaces replaced by underscores)
followed by the binary label column `y` (0 = malignant, 1 = benign).
"""

import csv

from sklearn.datasets import load_breast_cancer


def main(out_path="data/breast_cancer.csv"):
    ds = load_breast_cancer()
    names = [n.replace(" ", "_") for n in ds.feature_names]
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["y"])
        for row, label in zip(ds.data, ds.target):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
    print(f"{ds.data.shape[0]} rows x {ds.data.shape[1]} features -> {out_path}")


if __name__ == "__main__":
    main()
