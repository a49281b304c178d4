// Minimal end-to-end use of the library on synthetic data: preprocess,
// cluster into quality categories, pick features, train one classifier and
// score a held-out split.

#include <iostream>

#include "jcat/classify.hpp"
#include "jcat/cluster.hpp"
#include "jcat/evaluate.hpp"
#include "jcat/featsel.hpp"
#include "jcat/preprocess.hpp"
#include "jcat/table.hpp"

int main() {
    using namespace jcat;

    const SyntheticDataset data = synthesize_dataset(120, 42);
    const DropResult cleaned = drop_identifier_columns(data.table);
    const EncodeResult encoded = encode_record_fields(cleaned.table, 2021);
    const ScaleResult scaled = min_max_scale(impute_missing(encoded.table, ImputePolicy::ColumnMedian));

    const DistanceMatrix D = gower_matrix(scaled.matrix);
    const ClusterAssignment clusters = k_medoids(D, 3, 0);
    const CategoryMap categories = assign_categories(scaled.matrix, clusters.labels);
    std::vector<int> y;
    for (const int l : clusters.labels) y.push_back(static_cast<int>(categories.category_of(l)));

    std::cout << "silhouette: " << silhouette_width(D, clusters.labels) << "\n";

    const FeatureSubset subset = best_first_cfs(scaled.matrix, y);
    std::cout << "cfs subset (merit " << subset.merit << "):";
    for (const auto& name : subset.feature_names) std::cout << " [" << name << "]";
    std::cout << "\n";

    const SplitResult split = percentage_split(y, 0.8, 1);
    FeatureMatrix X_train, X_test;
    X_train.feature_names = X_test.feature_names = scaled.matrix.feature_names;
    X_train.kinds = X_test.kinds = scaled.matrix.kinds;
    std::vector<int> y_train, y_test;
    for (const std::size_t i : split.train) {
        X_train.values.push_back(scaled.matrix.values[i]);
        y_train.push_back(y[i]);
    }
    for (const std::size_t i : split.test) {
        X_test.values.push_back(scaled.matrix.values[i]);
        y_test.push_back(y[i]);
    }

    ClassifierSpec spec;
    spec.kind = ClassifierKind::Etc;
    spec.seed = 7;
    const TrainedModel model = train(spec, X_train, y_train);
    const auto pred = predict(model, X_test);
    const EvalMetrics m = metrics(confusion_matrix(y_test, pred, 3));
    std::cout << "extra-trees held-out accuracy: " << m.accuracy << "\n";
    return 0;
}
