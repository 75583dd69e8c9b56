"""Compare property span strategies on sentences whose negation cue sits
well outside a one-token window around the trigger."""
import statistics

from oilevents.corpus import iter_sentences
from oilevents.evaluation import stratified_kfold
from oilevents.features import hash_encoder
from oilevents.synthetic import distant_cue_standoff, to_documents
from oilevents.tasks import FeatureSpace, SpanStrategy, TrainConfig, event_instances
from oilevents.tasks.properties import fit_property, new_property_model
from oilevents.transfer import property_report

STRATEGIES = ["FixedWindow(r=1)", "FixedWindow(r=5)", "DepSubtree", "SelfAttentiveSpan"]


def main(seeds=range(3)):
    scores = {s: [] for s in STRATEGIES}
    for seed in seeds:
        sents = list(iter_sentences(to_documents(distant_cue_standoff(100, seed=seed))))
        inst = event_instances(sents, "polarity")
        tr, te = stratified_kfold([x.label for x in inst], 5, seed).train_test(0)
        space = FeatureSpace.build(sents, hash_encoder(32, 0))
        cfg = TrainConfig(epochs=15, seed=seed)
        for name in STRATEGIES:
            model = new_property_model("polarity", SpanStrategy.parse(name), cfg, space)
            fit_property(model, space, [inst[i] for i in tr], cfg)
            scores[name].append(property_report(model, space, [inst[i] for i in te]).f1)
    for name, f1s in scores.items():
        print(f"{name:<20} median F1 {statistics.median(f1s):.3f}")


if __name__ == "__main__":
    main()
