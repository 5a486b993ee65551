#include "trifuse/synth.hpp"

#include <cmath>

#include "trifuse/rng.hpp"

namespace trifuse {

namespace {

constexpr std::array<RawClass, 6> kExplicitClasses{
    RawClass::CarAccident, RawClass::Explosion, RawClass::Fighting,
    RawClass::Riot,        RawClass::Shooting,  RawClass::Abuse,
};

void validate(const SynthSpec& spec) {
    if (spec.train_size <= 0 || spec.test_size <= 0)
        throw UsageError("synth_dataset: split sizes must be positive");
    if (!(spec.explicit_prior > 0.0) || !(spec.explicit_prior < 1.0))
        throw UsageError("synth_dataset: explicit prior must lie in (0, 1)");
    for (ModalityId m : kAllModalities) {
        if (!spec.widths.count(m) || spec.widths.at(m) <= 0)
            throw UsageError("synth_dataset: missing or nonpositive width for " +
                             std::string(to_string(m)));
        if (!spec.separation.count(m) || spec.separation.at(m) < 0)
            throw UsageError("synth_dataset: missing or negative separation for " +
                             std::string(to_string(m)));
    }
}

Vector unit_direction(Rng& rng, Index dim) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = rng.gaussian();
    const Scalar n = v.norm();
    return n > 0 ? Vector(v / n) : Vector(Vector::Unit(dim, 0));
}

std::vector<SegmentRecord> make_split(const SynthSpec& spec, const std::map<ModalityId, Vector>& dirs,
                                      const std::string& split, int count, Rng rng) {
    // deterministic label counts from the prior, then a seeded order
    std::vector<int> labels(static_cast<std::size_t>(count), 0);
    if (!spec.interaction) {
        const int n_explicit = static_cast<int>(std::lround(spec.explicit_prior * count));
        for (int i = 0; i < n_explicit; ++i) labels[static_cast<std::size_t>(i)] = 1;
        rng.shuffle(labels);
    }

    std::vector<SegmentRecord> out;
    out.reserve(static_cast<std::size_t>(count));
    int explicit_seen = 0;
    for (int i = 0; i < count; ++i) {
        int label = labels[static_cast<std::size_t>(i)];
        std::map<ModalityId, double> cluster_sign;
        if (spec.interaction) {
            // label = sign agreement of the video and audio clusters;
            // language carries no signal
            const double sv = rng.below(2) ? 1.0 : -1.0;
            const double sa = rng.below(2) ? 1.0 : -1.0;
            cluster_sign[ModalityId::Video] = sv;
            cluster_sign[ModalityId::Audio] = sa;
            cluster_sign[ModalityId::Language] = 0.0;
            label = (sv == sa) ? 1 : 0;
        } else {
            const double s = label == 1 ? 1.0 : -1.0;
            for (ModalityId m : kAllModalities) cluster_sign[m] = s;
        }

        SegmentRecord r;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%s-%04d", split.c_str(), i);
        r.segment_id = idbuf;
        r.source_id = "synth";
        r.start_s = 0.0;
        r.end_s = 60.0;
        if (label == 1) {
            r.raw_class = kExplicitClasses[static_cast<std::size_t>(explicit_seen++) % kExplicitClasses.size()];
        } else {
            r.raw_class = RawClass::NormalActivities;
        }
        r.binary_label = map_class(r.raw_class);
        r.split = split;

        for (ModalityId m : kAllModalities) {
            const Index dim = spec.widths.at(m);
            const Vector& dir = dirs.at(m);
            const double offset = cluster_sign.at(m) * spec.separation.at(m) / 2.0;
            Vector x(dim);
            for (Index k = 0; k < dim; ++k) x[k] = offset * dir[k] + rng.gaussian();
            r.features[m] = std::move(x);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
    validate(spec);
    Rng root(seed);
    Rng dir_rng = root.child("directions");
    std::map<ModalityId, Vector> dirs;
    for (ModalityId m : kAllModalities) dirs[m] = unit_direction(dir_rng, spec.widths.at(m));

    SynthDataset out;
    out.train = make_split(spec, dirs, "train", spec.train_size, root.child("train"));
    out.test = make_split(spec, dirs, "test", spec.test_size, root.child("test"));
    return out;
}

}  // namespace trifuse
