// Copyright 2026 The platedpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lpr/dpm/model.hpp"

#include <string>
#include <vector>

#include "lpr/error.hpp"

namespace lpr::dpm {

void validate_model(const CharacterTreeModel& model) {
    if (model.parts.empty())
        raise(ErrorKind::parameter, "model has no parts");
    const int n = static_cast<int>(model.parts.size());
    if (static_cast<int>(model.edges.size()) != n - 1)
        raise(ErrorKind::parameter, "tree with " + std::to_string(n) +
                                        " parts needs " + std::to_string(n - 1) + " edges");

    for (const auto& p : model.parts) {
        if (p.cells_x < 1 || p.cells_y < 1)
            raise(ErrorKind::parameter, "part filter has empty extent");
        if (p.dim < 1)
            raise(ErrorKind::parameter, "part filter dimension must be positive");
        if (p.weights.size() != static_cast<std::size_t>(p.cells_x) * p.cells_y * p.dim)
            raise(ErrorKind::parameter, "part weight count does not match extent");
    }

    // every non-root part must be reached exactly once, parents before children
    std::vector<int> seen(n, 0);
    seen[0] = 1;
    for (const auto& e : model.edges) {
        if (e.parent < 0 || e.parent >= n || e.child <= 0 || e.child >= n)
            raise(ErrorKind::parameter, "edge references part outside the model");
        if (!seen[e.parent])
            raise(ErrorKind::parameter, "edge parent appears before it is reached");
        if (seen[e.child])
            raise(ErrorKind::parameter, "part " + std::to_string(e.child) +
                                            " reached by more than one edge");
        seen[e.child] = 1;
        if (!(e.deform.a <= -CONCAVITY_EPS) || !(e.deform.b <= -CONCAVITY_EPS))
            raise(ErrorKind::parameter, "deformation coefficients must be <= -" +
                                            std::to_string(CONCAVITY_EPS));
    }
    for (int i = 0; i < n; ++i)
        if (!seen[i])
            raise(ErrorKind::parameter, "part " + std::to_string(i) + " is disconnected");
}

void validate_model_set(const CharacterModelSet& set) {
    if (set.alphabet.empty())
        raise(ErrorKind::parameter, "model set has an empty alphabet");
    if (set.classes.size() != set.alphabet.size())
        raise(ErrorKind::parameter, "class count does not match alphabet");
    for (std::size_t i = 0; i < set.classes.size(); ++i) {
        const auto& c = set.classes[i];
        if (c.label != set.alphabet[i])
            raise(ErrorKind::parameter, "class order does not match alphabet");
        if (c.mixtures.empty())
            raise(ErrorKind::parameter, std::string("class ") + c.label + " has no mixtures");
        for (const auto& m : c.mixtures) {
            if (m.label != c.label)
                raise(ErrorKind::parameter, "mixture label does not match its class");
            validate_model(m);
        }
    }
}

CharacterTreeModel make_default_tree(char label) {
    CharacterTreeModel m;
    m.label = label;

    auto blank = [](int cx, int cy) {
        PartFilter f;
        f.cells_x = cx;
        f.cells_y = cy;
        f.dim = HOG_DIM;
        f.weights.assign(static_cast<std::size_t>(cx) * cy * HOG_DIM, 0.0);
        return f;
    };
    m.parts.push_back(blank(4, 8)); // root: whole glyph
    m.parts.push_back(blank(4, 4)); // upper half
    m.parts.push_back(blank(4, 4)); // lower half

    TreeEdge top;
    top.parent = 0;
    top.child = 1;
    top.anchor_dx = 0;
    top.anchor_dy = 0;
    m.edges.push_back(top);

    TreeEdge bottom;
    bottom.parent = 0;
    bottom.child = 2;
    bottom.anchor_dx = 0;
    bottom.anchor_dy = 4;
    m.edges.push_back(bottom);

    return m;
}

} // namespace lpr::dpm
