// Generated by tests/oracle/oracle.py; do not edit.
#pragma once

#include <vector>

namespace oracle {

inline constexpr double kRidgeIntercept = 0.9993334934059988;
inline const std::vector<double> kRidgeCoef{1.9705117180479599, 0.001687652350084112, -0.9873011666852622, -0.014218257571680703, 0.48183345836107677};
inline constexpr double kLassoIntercept = 1.003857811583838;
inline const std::vector<double> kLassoCoef{1.8372973724817803, -0.0, -0.8499285038545199, -0.0, 0.3114043057135154};
inline const std::vector<double> kLogitParams{-0.16965025466077915, 0.8518752169788419, 0.016700958855414262, -0.08855621042382283, 0.11909654492314209, -0.43675066065804247};
inline constexpr double kPenLogitIntercept = -0.16659429890281016;
inline const std::vector<double> kPenLogitCoef{0.6039349196204613, 0.038790237908507726, -0.0715440102505496, 0.052453919532243196, -0.3289740488118047};
inline const std::vector<double> kGbtPredictions{2.7008510983128473, 2.624209160751991, 3.2189007252590702, 5.292454064003963, 2.9058148451404735, 1.7023108823903967, -0.3583484751593416, 0.8668922008037215, 2.664433441199237, 1.73744464161837, -0.6382378691147157, -3.584908038335386, -2.9958591507594097, -0.5747722278366452, 0.7092956844142235, -0.39040753450225324, -0.04428572339949868, 1.929458710810076, 3.9949848491023165, 5.347973827172984, 2.1910164197121715, 0.6794262388649155, 0.8673311947660739, 1.8453911864602466, 1.7189410462900445, 1.155996838822638, -0.3298703445791104, -0.15976261315067536, -0.10444058999916209, -1.627614434613651, -1.7642452635825088, -1.4700070353958363, 1.826868138594212, 2.7008510983128473, 2.484445934098949, 2.5656272487782137, 3.6839259324310945, 5.292454064003963, 3.1486036799449173, 1.1068711041273205, -0.4127025547312851, 0.8668922008037215, 2.8106341000659256, 1.73744464161837, -0.6554362449502625, -3.584908038335386, -2.941505071187466, -0.08592387743009874, 0.7092956844142235, -0.6898316424684968, 0.180539164142036, 1.9796524075482997, 4.9688838533453765, 5.347973827172984, 2.1910164197121715, 0.6275218255542144, 1.0037788311822866, 1.8453911864602466, 1.6028129252487808, 1.155996838822638, -0.3298703445791104, -0.15976261315067536, 0.09816013530293569, -1.627614434613651, -2.1955565088007867, -1.4700070353958363, 2.1738648621025574, 2.7008510983128473, 2.484445934098949, 2.5656272487782137, 3.6839259324310945, 5.347973827172984, 3.1486036799449173, 0.677715522292438, -0.4127025547312851, 2.2546783429528583, 2.8106341000659256, 1.73744464161837, -1.0636777890824571, -3.584908038335386, -2.333029859256719, 0.3807437618763728, 0.6125167361063381, -0.8479767185870728, 0.34768586953714925, 2.082846449308476, 5.292454064003963, 5.347973827172984, 1.816628383525839, 0.7028300766832509, 1.065130835308657, 1.7636628865167672, 1.517124349637255, 1.155996838822638, -0.6382378691147157, -0.058083146313591225, -0.07310427362896497, -1.9862530641085896, -2.118481572371582, -0.8479767185870728, 2.1738648621025574, 2.5546907022782293, 2.484445934098949, 2.484445934098949, 3.6839259324310945, 5.347973827172984, 3.1486036799449173, 0.6275218255542144, -0.4127025547312851, 2.3591714179623366, 2.8106341000659256, 1.5945263825875766, -1.3599777532254007, -2.790993881024479, -1.840959263244336, 0.47752271018425846, 0.3807437618763728, -0.9373331234735174, 0.34768586953714925, 2.5478716564805};
inline const std::vector<double> kQuantileSample{3.1, -0.4, 2.2, 7.5, 0.0, 1.1, -2.3, 4.4};
inline const std::vector<double> kQuantiles{-1.9674999999999998, 1.6500000000000001, 6.9575000000000005};
inline constexpr double kChiSqSf_7_3_dof4 = 0.12085874882121235;
inline constexpr double kHandDoubleDifference = 1.5;
inline constexpr double kHandRegressionTau = 1.500000000000002;
inline const std::vector<double> kDemeanedValues{-0.03809523809524018, 1.2619047619047599, -1.2238095238095243, -1.157142857142858, 1.157142857142858, 0.24285714285714205, -0.242857142857142, 1.1952380952380957, -1.504761904761904, 0.30952380952381153};
inline const std::vector<double> kComplementShares{0.3333333333333333, 0.2};
inline constexpr double kS2Seed2TwfeTau = 0.7302921332687946;
inline constexpr double kS2Seed2TrueOverall = 1.596085409252669;

}  // namespace oracle
